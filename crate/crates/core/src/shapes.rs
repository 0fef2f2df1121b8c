//! Flat sub-shapes of the toric domains `U_lambda = { |p| / F < 1 }`, the
//! log-containment metric on star-shaped domains, linear actions on them, and
//! stable norms of flat metrics.
//!
//! Only flat tori `L_v = { p = v }` are used, so every shape computed here is
//! an inner approximation of the full shape.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::IntMatrix;
use crate::error::{LabError, Result};
use crate::form::ContactForm;
use crate::geometry::{check_dim, sphere_grid, torus_grid, CEPoint, Direction, TorusPoint};
use crate::stats::tail_fit;

/// Shapes are open, so boundary points are pulled inside by this factor.
pub const BOUNDARY_SHRINK: f64 = 0.999;
/// Default direction resolution for `n = 2` and `n = 3`.
pub const DEFAULT_DIRECTIONS: [usize; 2] = [256, 1024];

/// A constant positive-definite metric on `T^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatMetric {
    n: usize,
    g: Vec<f64>,
    #[serde(skip)]
    g_inv: Vec<f64>,
    #[serde(skip)]
    min_eig: f64,
}

impl FlatMetric {
    /// `G` from row-major entries; must be exactly symmetric with smallest
    /// eigenvalue above `1e-10`.
    pub fn new(n: usize, entries: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if entries.len() != n * n {
            return Err(LabError::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let m = DMatrix::from_row_slice(n, n, entries);
        if m != m.transpose() || entries.iter().any(|x| !x.is_finite()) {
            return Err(LabError::InvalidArgument("metric must be symmetric".into()));
        }
        let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if min_eig <= 1e-10 {
            return Err(LabError::InvalidArgument(format!(
                "metric must be positive definite (min eigenvalue {min_eig:e})"
            )));
        }
        let inv = m.try_inverse().ok_or(LabError::Singular)?;
        let g_inv = (0..n * n).map(|k| inv[(k / n, k % n)]).collect();
        Ok(FlatMetric {
            n,
            g: entries.to_vec(),
            g_inv,
            min_eig,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n + i] = 1.0;
        }
        FlatMetric::new(n, &e).expect("identity metric")
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut e = vec![0.0; n * n];
        for (i, &x) in d.iter().enumerate() {
            e[i * n + i] = x;
        }
        FlatMetric::new(n, &e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major entries of `G`.
    pub fn entries(&self) -> &[f64] {
        &self.g
    }

    /// Row-major entries of `G^{-1}`.
    pub fn inverse_entries(&self) -> &[f64] {
        &self.g_inv
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    fn quad(m: &[f64], n: usize, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                s += v[r] * m[r * n + c] * v[c];
            }
        }
        s
    }

    /// `sqrt(v^T G v)`.
    pub fn norm(&self, v: &[f64]) -> f64 {
        Self::quad(&self.g, self.n, v).sqrt()
    }

    /// Dual norm on covectors, `sqrt(p^T G^{-1} p)`.
    pub fn dual_norm(&self, p: &[f64]) -> f64 {
        Self::quad(&self.g_inv, self.n, p).sqrt()
    }

    /// Profile of the metric contact form: the unit codisk boundary along `u`.
    pub fn dual_profile(&self, u: &[f64]) -> f64 {
        1.0 / self.dual_norm(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Circle,
    Fibonacci,
}

/// Direction grid shared by star domains.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    dim: usize,
    kind: GridKind,
    dirs: Vec<Direction>,
}

impl DirectionGrid {
    pub fn new(n: usize, resolution: usize) -> Result<Arc<Self>> {
        let dirs = sphere_grid(n, resolution)?;
        let kind = if n == 2 {
            GridKind::Circle
        } else {
            GridKind::Fibonacci
        };
        Ok(Arc::new(DirectionGrid { dim: n, kind, dirs }))
    }

    pub fn default_for(n: usize) -> Result<Arc<Self>> {
        check_dim(n)?;
        Self::new(n, DEFAULT_DIRECTIONS[n - 2])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.dirs
    }

    /// Index of the grid direction closest to `v / |v|`.
    pub fn nearest(&self, v: &[f64]) -> usize {
        match self.kind {
            GridKind::Circle => {
                let n = self.dirs.len();
                let t = v[1].atan2(v[0]) / std::f64::consts::TAU;
                ((t * n as f64).round() as i64).rem_euclid(n as i64) as usize
            }
            GridKind::Fibonacci => {
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, d) in self.dirs.iter().enumerate() {
                    let u = d.u();
                    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                    if dot > best.0 {
                        best = (dot, i);
                    }
                }
                best.1
            }
        }
    }
}

/// A bounded star-shaped domain given by its radial function on a grid.
#[derive(Debug, Clone)]
pub struct StarDomain {
    grid: Arc<DirectionGrid>,
    rho: Vec<f64>,
}

impl StarDomain {
    pub fn new(grid: Arc<DirectionGrid>, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: grid.len(),
                found: rho.len(),
            });
        }
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(LabError::InvalidArgument(format!(
                "radial values must be positive and finite, got {bad}"
            )));
        }
        Ok(StarDomain { grid, rho })
    }

    /// Ball of radius `r`.
    pub fn ball(grid: Arc<DirectionGrid>, r: f64) -> Result<Self> {
        let rho = vec![r; grid.len()];
        StarDomain::new(grid, rho)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Radial value in the direction of `v` (nearest grid direction).
    pub fn radius_towards(&self, v: &[f64]) -> f64 {
        self.rho[self.grid.nearest(v)]
    }

    /// `v` lies in the domain, resolved on the grid.
    pub fn contains(&self, v: &[f64]) -> bool {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        norm == 0.0 || norm < self.radius_towards(&padded(v))
    }

    /// Rows `(u_1, ..., u_n, rho)` for tabular output.
    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.grid.dirs.iter().zip(&self.rho).map(|(d, &r)| {
            let mut row = d.u().to_vec();
            row.push(r);
            row
        })
    }

    fn same_grid(&self, other: &StarDomain) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    /// Largest `max_u rho_self / rho_other`: the least `c` with `self ⊂ c other`.
    pub fn containment_factor(&self, other: &StarDomain) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| a / b)
            .fold(0.0, f64::max))
    }
}

fn padded(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

/// Radial function of `{ v : L_v ⊂ U_lambda }`: `rho(u) = min_q F(u, q)`.
pub fn flat_shape(
    form: &ContactForm,
    grid: &Arc<DirectionGrid>,
    q_per_axis: usize,
) -> Result<StarDomain> {
    if form.dim() != grid.dim {
        return Err(LabError::DimensionMismatch {
            expected: grid.dim,
            found: form.dim(),
        });
    }
    if q_per_axis == 0 {
        return Err(LabError::InvalidArgument("empty base grid".into()));
    }
    let base = if form.is_q_independent() {
        vec![TorusPoint::origin(form.dim())]
    } else {
        torus_grid(form.dim(), q_per_axis)
    };
    let rho = grid
        .dirs
        .par_iter()
        .map(|u| {
            base.iter()
                .map(|q| form.profile_at(&CEPoint { u: *u, q: *q }))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    StarDomain::new(grid.clone(), rho)
}

/// `delta(A, B) = log` of the least `c >= 1` with `A ⊂ cB` and `B ⊂ cA`.
pub fn delta(a: &StarDomain, b: &StarDomain) -> Result<f64> {
    let c = a.containment_factor(b)?.max(b.containment_factor(a)?);
    Ok(c.ln().max(0.0))
}

/// `I A`, resampled on the grid of `A`: `rho'(u) = rho_A(w / |w|) / |w|`
/// with `w = I^{-1} u`.
pub fn act(i: &IntMatrix, a: &StarDomain) -> Result<StarDomain> {
    if i.size() != a.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            found: i.size(),
        });
    }
    let inv = i.to_f64().try_inverse().ok_or(LabError::Singular)?;
    act_by_inverse(&inv, a)
}

/// Action of the linear map whose inverse is `inv`.
fn act_by_inverse(inv: &DMatrix<f64>, a: &StarDomain) -> Result<StarDomain> {
    let rho = a
        .grid
        .dirs
        .par_iter()
        .map(|u| {
            let w = inv * DVector::from_column_slice(u.u());
            let norm = w.norm();
            a.radius_towards(&padded(w.as_slice())) / norm
        })
        .collect();
    StarDomain::new(a.grid.clone(), rho)
}

/// `delta(A, I^k A)` for `k = 1..=k_max` and its growth rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementEstimate {
    pub deltas: Vec<f64>,
    /// Least-squares slope over the last half of `deltas`.
    pub slope: f64,
}

/// Growth rate of `k -> delta(A, I^k A)`, a lower bound for the displacement
/// of the corresponding mapping class.
///
/// The factor with `I^k A ⊂ c A` is evaluated as `A ⊂ c I^{-k} A`; the two are
/// equal, but the second samples broad minima of the radial function instead
/// of thin maxima, which a finite grid resolves.
pub fn displacement_estimate(
    i: &IntMatrix,
    a: &StarDomain,
    k_max: usize,
) -> Result<DisplacementEstimate> {
    if k_max < 8 {
        return Err(LabError::InvalidArgument(format!(
            "displacement horizon must be >= 8, got {k_max}"
        )));
    }
    if i.size() != a.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            found: i.size(),
        });
    }
    let i_inv = i.inverse()?;
    let mut deltas = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let k = k as u32;
        // I^k A has inverse map I^{-k}; I^{-k} A has inverse map I^k
        let forward = act_by_inverse(&i_inv.pow_f64(k), a)?;
        let backward = act_by_inverse(&i.pow_f64(k), a)?;
        let c = a
            .containment_factor(&forward)?
            .max(a.containment_factor(&backward)?);
        deltas.push(c.ln().max(0.0));
    }
    let slope = tail_fit(&deltas, 1).slope.max(0.0);
    Ok(DisplacementEstimate { deltas, slope })
}

/// Length of the shortest closed geodesic in the class `gamma`:
/// `sqrt(gamma^T G gamma)`.
pub fn stable_norm(g: &FlatMetric, gamma: &[i64]) -> Result<f64> {
    if gamma.len() != g.dim() {
        return Err(LabError::DimensionMismatch {
            expected: g.dim(),
            found: gamma.len(),
        });
    }
    if gamma.iter().all(|&x| x == 0) {
        return Err(LabError::TrivialClass);
    }
    let v: Vec<f64> = gamma.iter().map(|&x| x as f64).collect();
    Ok(g.norm(&v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    /// Row-major entries of `G`.
    pub metric: Vec<f64>,
    /// `min (l_gamma - <b, gamma>)` over sampled `b` and `gamma`.
    pub worst_margin: f64,
    pub pass: bool,
}

/// Checks `<b, gamma> <= l_gamma` for `b` on the (shrunk) boundary of the flat
/// shape of the metric codisk bundle and every sampled class `gamma`.
pub fn duality_check(
    g: &FlatMetric,
    classes: &[Vec<i64>],
    grid: &Arc<DirectionGrid>,
    q_per_axis: usize,
) -> Result<DualityReport> {
    if classes.is_empty() {
        return Err(LabError::InvalidArgument("no sample classes".into()));
    }
    let lengths = classes
        .iter()
        .map(|c| stable_norm(g, c))
        .collect::<Result<Vec<_>>>()?;
    let form = ContactForm::metric(g.clone())?;
    let shape = flat_shape(&form, grid, q_per_axis)?;
    let mut worst = f64::INFINITY;
    for (u, &r) in grid.dirs.iter().zip(shape.rho()) {
        for (c, &len) in classes.iter().zip(&lengths) {
            let pairing: f64 = u.u().iter().zip(c).map(|(a, &b)| a * b as f64).sum();
            worst = worst.min(len - BOUNDARY_SHRINK * r * pairing);
        }
    }
    Ok(DualityReport {
        metric: g.entries().to_vec(),
        worst_margin: worst,
        pass: worst >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle(n: usize) -> Arc<DirectionGrid> {
        DirectionGrid::new(2, n).unwrap()
    }

    #[test]
    fn flat_shape_examples() {
        let grid = circle(64);
        let s = flat_shape(&ContactForm::round(2), &grid, 16).unwrap();
        assert!(s.rho().iter().all(|&r| r == 1.0));
        let s = flat_shape(&ContactForm::constant(2, 2.0).unwrap(), &grid, 16).unwrap();
        assert!(s.rho().iter().all(|&r| r == 2.0));
        let f = ContactForm::cosine(2, 1.0, &[(0.5, vec![1, 0])]).unwrap();
        let s = flat_shape(&f, &grid, 16).unwrap();
        for &r in s.rho() {
            assert_relative_eq!(r, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn delta_examples() {
        let grid = circle(64);
        let ball = StarDomain::ball(grid.clone(), 1.0).unwrap();
        assert_eq!(delta(&ball, &ball).unwrap(), 0.0);
        let big = StarDomain::ball(grid.clone(), 2.0).unwrap();
        assert_relative_eq!(delta(&ball, &big).unwrap(), 2f64.ln());
        // ellipse with radii (2, 1/2)
        let rho = grid
            .directions()
            .iter()
            .map(|d| {
                let u = d.u();
                1.0 / ((u[0] / 2.0).powi(2) + (u[1] * 2.0).powi(2)).sqrt()
            })
            .collect();
        let ellipse = StarDomain::new(grid.clone(), rho).unwrap();
        assert_relative_eq!(delta(&ball, &ellipse).unwrap(), 2f64.ln(), epsilon = 1e-12);
        let other = StarDomain::ball(circle(32), 1.0).unwrap();
        assert_eq!(delta(&ball, &other).unwrap_err(), LabError::GridMismatch);
    }

    #[test]
    fn act_examples() {
        let grid = circle(256);
        let ball = StarDomain::ball(grid.clone(), 1.0).unwrap();
        let same = act(&IntMatrix::identity(2), &ball).unwrap();
        for (a, b) in same.rho().iter().zip(ball.rho()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
        let two = IntMatrix::from_rows([[2, 0], [0, 2]]);
        let doubled = act(&two, &ball).unwrap();
        for &r in doubled.rho() {
            assert_relative_eq!(r, 2.0, epsilon = 1e-12);
        }
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        let e = act(&cat, &ball).unwrap();
        let (lo, hi) = e
            .rho()
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        // radii are the singular values phi^2, phi^-2; the grid misses the
        // major axis by at most half a grid step
        assert_relative_eq!(hi, phi2, max_relative = 5e-3);
        assert_relative_eq!(lo, 1.0 / phi2, max_relative = 5e-3);
    }

    #[test]
    fn displacement_examples() {
        let grid = circle(256);
        let ball = StarDomain::ball(grid, 1.0).unwrap();
        let id = displacement_estimate(&IntMatrix::identity(2), &ball, 10).unwrap();
        assert_eq!(id.slope, 0.0);
        let rot = IntMatrix::from_rows([[0, -1], [1, 0]]);
        let r = displacement_estimate(&rot, &ball, 12).unwrap();
        assert!(r.deltas.iter().all(|&d| d < 1e-12));
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        let c = displacement_estimate(&cat, &ball, 20).unwrap();
        assert!((c.slope - 0.96242).abs() < 1e-2, "{}", c.slope);
        assert!(displacement_estimate(&cat, &ball, 4).is_err());
    }

    #[test]
    fn stable_norm_examples() {
        let id = FlatMetric::identity(2);
        assert_eq!(stable_norm(&id, &[1, 0]).unwrap(), 1.0);
        assert_eq!(stable_norm(&id, &[3, 4]).unwrap(), 5.0);
        let g = FlatMetric::diagonal(&[4.0, 1.0]).unwrap();
        assert_eq!(stable_norm(&g, &[1, 0]).unwrap(), 2.0);
        assert_eq!(
            stable_norm(&g, &[0, 0]).unwrap_err(),
            LabError::TrivialClass
        );
    }

    #[test]
    fn metric_validation() {
        assert!(FlatMetric::new(2, &[1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(FlatMetric::new(2, &[1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(FlatMetric::new(2, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn duality_examples() {
        let grid = circle(128);
        let classes = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, -3]];
        for g in [
            FlatMetric::identity(2),
            FlatMetric::diagonal(&[4.0, 1.0]).unwrap(),
        ] {
            let rep = duality_check(&g, &classes, &grid, 8).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert!(rep.worst_margin >= 0.0);
        }
        let bad = duality_check(&FlatMetric::identity(2), &[vec![0, 0]], &grid, 8);
        assert_eq!(bad.unwrap_err(), LabError::TrivialClass);
    }
}
