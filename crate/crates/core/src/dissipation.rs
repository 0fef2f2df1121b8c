//! Dissipation sequence `r_k(f, lambda) = max_x |log ((f^*)^{-k} lambda / lambda)(x)|`,
//! growth-rate estimates, classification, leading Lyapunov exponents, and the
//! spectral lower bound check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{a_block, s_value};
use crate::error::{LabError, Result};
use crate::form::ContactForm;
use crate::geometry::{check_dim, sphere_grid, CEPoint, Direction, TorusPoint};
use crate::maps::ContactMap;
use crate::stats::tail_fit;

/// Sample points of `S^{n-1} x T^n`: a regular base grid times a direction grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub q_per_axis: usize,
    pub directions: usize,
}

impl SamplingGrid {
    pub fn new(q_per_axis: usize, directions: usize) -> Result<Self> {
        if q_per_axis == 0 || directions < 4 {
            return Err(LabError::InvalidArgument(format!(
                "grid needs q_per_axis >= 1 and directions >= 4, got {q_per_axis} x {directions}"
            )));
        }
        Ok(SamplingGrid {
            q_per_axis,
            directions,
        })
    }

    /// 64 per base axis with 128 directions (`n = 2`) or 256 (`n = 3`).
    pub fn default_for(n: usize) -> Self {
        SamplingGrid {
            q_per_axis: 64,
            directions: if n == 2 { 128 } else { 256 },
        }
    }

    /// Every resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        SamplingGrid {
            q_per_axis: self.q_per_axis * factor,
            directions: self.directions * factor,
        }
    }

    pub fn len(&self, n: usize) -> usize {
        self.q_per_axis.pow(n as u32) * self.directions
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn sampler(&self, n: usize) -> Result<impl Fn(usize) -> CEPoint + Sync + '_> {
        check_dim(n)?;
        let dirs: Vec<Direction> = sphere_grid(n, self.directions)?;
        let per = self.q_per_axis;
        let h = 1.0 / per as f64;
        Ok(move |idx: usize| {
            let u = dirs[idx % dirs.len()];
            let mut rest = idx / dirs.len();
            let mut q = [0.0; 3];
            for c in q.iter_mut().take(n) {
                *c = (rest % per) as f64 * h;
                rest /= per;
            }
            CEPoint {
                u,
                q: TorusPoint::new(&q[..n]).expect("supported dimension"),
            }
        })
    }
}

fn check_dims(f: &ContactMap, form: &ContactForm) -> Result<()> {
    if f.dim() != form.dim() {
        return Err(LabError::DimensionMismatch {
            expected: f.dim(),
            found: form.dim(),
        });
    }
    Ok(())
}

fn max_merge(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.max(y);
    }
    a
}

/// `r_1, ..., r_K` as maxima over the grid of `|sum_{j<k} log c(f^{-j} x)|`
/// with `c = (f^{-1})^* lambda / lambda`, accumulated along backward orbits.
///
/// The accumulation is sign-symmetric: the forward sums `sum_{j<k} log c_f(f^j y)`
/// from each grid point `y` are the same quantity at `x = f^k y` with opposite
/// sign, so they sample the same maximum at the points `f^k(grid)`. This makes
/// `r_k(f) = r_k(f^{-1})` hold exactly on every grid.
pub fn r_sequence(
    f: &ContactMap,
    form: &ContactForm,
    k_max: usize,
    grid: &SamplingGrid,
) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(LabError::InvalidArgument("K must be >= 1".into()));
    }
    check_dims(f, form)?;
    let g = f.inverse();
    let point = grid.sampler(f.dim())?;
    (0..grid.len(f.dim()))
        .into_par_iter()
        .try_fold(
            || vec![0.0; k_max],
            |mut acc, idx| -> Result<Vec<f64>> {
                for map in [&g, f] {
                    let mut x = point(idx);
                    let mut sum = 0.0;
                    for slot in acc.iter_mut() {
                        let (y, c) = map.image_and_factor(form, &x)?;
                        sum += c.ln();
                        *slot = slot.max(sum.abs());
                        x = y;
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(|| vec![0.0; k_max], |a, b| Ok(max_merge(a, b)))
}

/// Both growth-rate estimators of a dissipation sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiEstimate {
    /// Least-squares slope over the last half of the series.
    pub chi_hat: f64,
    /// `r_K / K`.
    pub chi_last: f64,
    /// RMS residual of the tail fit relative to the mean fitted value.
    pub relative_residual: f64,
}

pub fn chi_estimate(r_series: &[f64]) -> Result<ChiEstimate> {
    if r_series.len() < 8 {
        return Err(LabError::InvalidArgument(format!(
            "need at least 8 terms, got {}",
            r_series.len()
        )));
    }
    let fit = tail_fit(r_series, 1);
    let relative_residual = if fit.rms_residual == 0.0 {
        0.0
    } else if fit.mean_abs_fit == 0.0 {
        f64::INFINITY
    } else {
        fit.rms_residual / fit.mean_abs_fit
    };
    let k = r_series.len();
    Ok(ChiEstimate {
        chi_hat: fit.slope,
        chi_last: r_series[k - 1] / k as f64,
        relative_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "Elliptic-consistent")]
    EllipticConsistent,
    Hyperbolic,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// `chi_hat` above this counts as linear growth.
    pub hyperbolic_floor: f64,
    /// Largest accepted relative residual of the tail fit for a hyperbolic verdict.
    pub max_relative_residual: f64,
    /// `max r_k` below this is consistent with a bounded sequence.
    pub bounded_ceiling: f64,
    /// Largest accepted `r_K - r_{3K/4}` for an elliptic-consistent verdict.
    pub plateau_increment: f64,
    /// Slack of the spectral bound check.
    pub bound_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            hyperbolic_floor: 0.05,
            max_relative_residual: 0.1,
            bounded_ceiling: 0.5,
            plateau_increment: 1e-3,
            bound_tol: 0.05,
        }
    }
}

/// Consistency verdict; boundedness can never be certified from finitely
/// many terms.
pub fn classify(r_series: &[f64], th: &Thresholds) -> Result<Verdict> {
    let est = chi_estimate(r_series)?;
    if est.chi_hat > th.hyperbolic_floor && est.relative_residual < th.max_relative_residual {
        return Ok(Verdict::Hyperbolic);
    }
    let k = r_series.len();
    let max = r_series.iter().copied().fold(0.0, f64::max);
    let late = r_series[k - 1] - r_series[3 * k / 4 - 1];
    if max < th.bounded_ceiling && late < th.plateau_increment {
        return Ok(Verdict::EllipticConsistent);
    }
    Ok(Verdict::Indeterminate)
}

/// `(1/K) max_x |log ||D f^K (x)|||` with chart Jacobians and operator norms.
pub fn lyapunov_estimate(f: &ContactMap, k_max: usize, grid: &SamplingGrid) -> Result<f64> {
    if k_max < 8 {
        return Err(LabError::InvalidArgument(format!(
            "Lyapunov horizon must be >= 8, got {k_max}"
        )));
    }
    let point = grid.sampler(f.dim())?;
    let best = (0..grid.len(f.dim()))
        .into_par_iter()
        .map(|idx| -> Result<f64> {
            let mut x = point(idx);
            let (mut prod, y) = f.chart_jacobian(&x)?;
            let mut log_scale = 0.0;
            x = y;
            for _ in 1..k_max {
                let scale = prod.norm();
                log_scale += scale.ln();
                prod /= scale;
                let (jac, y) = f.chart_jacobian(&x)?;
                prod = jac * prod;
                x = y;
            }
            let op = prod.singular_values().max();
            Ok((log_scale + op.ln()).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(best / k_max as f64)
}

/// Outcome of the spectral lower bound `chi(f) >= s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `s(A_I)` for `n = 2`, `s(I_f)` for `n = 3`.
    pub s_target: f64,
    pub chi_hat: f64,
    pub tol: f64,
    pub pass: bool,
    /// Declared conservative yet classified hyperbolic.
    pub conservative_contradiction: bool,
}

/// Spectral target of the bound for `f`.
pub fn spectral_target(f: &ContactMap) -> Result<f64> {
    let i = f.homology_action();
    match f.dim() {
        2 => s_value(&a_block(i)?.a),
        _ => s_value(i),
    }
}

/// Bound check from an already computed dissipation sequence.
pub fn bound_check(
    f: &ContactMap,
    r_series: &[f64],
    th: &Thresholds,
    conservative: bool,
) -> Result<BoundCheck> {
    let s_target = spectral_target(f)?;
    let chi_hat = chi_estimate(r_series)?.chi_hat;
    let verdict = classify(r_series, th)?;
    Ok(BoundCheck {
        s_target,
        chi_hat,
        tol: th.bound_tol,
        pass: chi_hat >= s_target - th.bound_tol,
        conservative_contradiction: conservative && verdict == Verdict::Hyperbolic,
    })
}

pub fn verify_bound(
    f: &ContactMap,
    form: &ContactForm,
    k_max: usize,
    grid: &SamplingGrid,
    th: &Thresholds,
    conservative: bool,
) -> Result<BoundCheck> {
    let r = r_sequence(f, form, k_max, grid)?;
    bound_check(f, &r, th, conservative)
}

/// Relative change of `r_K` when every grid resolution is doubled.
pub fn refinement_delta(
    f: &ContactMap,
    form: &ContactForm,
    k_max: usize,
    grid: &SamplingGrid,
) -> Result<f64> {
    let coarse = r_sequence(f, form, k_max, grid)?[k_max - 1];
    let fine = r_sequence(f, form, k_max, &grid.refined(2))?[k_max - 1];
    Ok(relative_change(coarse, fine))
}

pub(crate) fn relative_change(coarse: f64, fine: f64) -> f64 {
    (fine - coarse).abs() / coarse.abs().max(1e-9)
}

/// The dissipation report emitted per map and form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationReport {
    pub map_id: String,
    pub lambda_id: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub grid: SamplingGrid,
    pub r_series: Vec<f64>,
    pub chi_hat: f64,
    pub chi_last: f64,
    pub lyap_hat: Option<f64>,
    pub verdict: Verdict,
    pub bound_check: Option<BoundCheck>,
}

impl DissipationReport {
    pub fn from_series(
        map_id: &str,
        lambda_id: &str,
        grid: SamplingGrid,
        r_series: Vec<f64>,
        th: &Thresholds,
    ) -> Result<Self> {
        let est = chi_estimate(&r_series)?;
        let verdict = classify(&r_series, th)?;
        Ok(DissipationReport {
            map_id: map_id.into(),
            lambda_id: lambda_id.into(),
            k: r_series.len(),
            grid,
            chi_hat: est.chi_hat,
            chi_last: est.chi_last,
            r_series,
            lyap_hat: None,
            verdict,
            bound_check: None,
        })
    }
}
