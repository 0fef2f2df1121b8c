//! Contact forms on the space of contact elements, written `F * lambda_round`
//! with a positive profile `F(u, q)` drawn from a small closed-form catalog.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{LabError, Result};
use crate::geometry::{check_dim, sphere_grid, torus_grid, CEPoint};
use crate::maps::ContactMap;
use crate::shapes::FlatMetric;

/// Resolution of the positivity check for profiles without an analytic bound.
pub const POSITIVITY_GRID: usize = 64;

/// One term `amp * cos(2 pi <k, q> + phase) * w(u)` of a trigonometric profile,
/// where `w(u) = <dir, u>` if a direction is given and `1` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    pub amp: f64,
    pub q_freq: Vec<i64>,
    pub dir: Option<Vec<f64>>,
    pub phase: f64,
}

impl Wave {
    pub fn new(amp: f64, q_freq: Vec<i64>) -> Self {
        Wave {
            amp,
            q_freq,
            dir: None,
            phase: 0.0,
        }
    }

    fn eval(&self, u: &[f64], q: &[f64]) -> f64 {
        let arg: f64 = self
            .q_freq
            .iter()
            .zip(q)
            .map(|(&k, &x)| k as f64 * x)
            .sum::<f64>();
        let w = match &self.dir {
            Some(d) => d.iter().zip(u).map(|(a, b)| a * b).sum(),
            None => 1.0,
        };
        self.amp * (TAU * arg + self.phase).cos() * w
    }

    fn weight_bound(&self) -> f64 {
        let w = match &self.dir {
            Some(d) => d.iter().map(|x| x * x).sum::<f64>().sqrt(),
            None => 1.0,
        };
        self.amp.abs() * w
    }
}

#[derive(Clone)]
pub enum Profile {
    Round,
    Constant(f64),
    Cosine {
        offset: f64,
        waves: Vec<Wave>,
    },
    /// Form of a flat metric: `F(u) = 1 / sqrt(u^T G^{-1} u)`.
    Metric(FlatMetric),
    Scaled(f64, Box<Profile>),
    Sum(Box<Profile>, Box<Profile>),
    /// `g^* lambda_base` for a closed-form contactomorphism `g`.
    Pullback {
        base: Box<Profile>,
        map: Box<ContactMap>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Round => write!(f, "Round"),
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Cosine { offset, waves } => f
                .debug_struct("Cosine")
                .field("offset", offset)
                .field("waves", waves)
                .finish(),
            Profile::Metric(g) => write!(f, "Metric({g:?})"),
            Profile::Scaled(c, p) => write!(f, "Scaled({c}, {p:?})"),
            Profile::Sum(a, b) => write!(f, "Sum({a:?}, {b:?})"),
            Profile::Pullback { base, map } => {
                write!(f, "Pullback({base:?}, {})", map.describe())
            }
        }
    }
}

impl Profile {
    fn eval(&self, x: &CEPoint) -> f64 {
        match self {
            Profile::Round => 1.0,
            Profile::Constant(c) => *c,
            Profile::Cosine { offset, waves } => {
                let (u, q) = (x.u.u(), x.q.q());
                offset + waves.iter().map(|w| w.eval(u, q)).sum::<f64>()
            }
            Profile::Metric(g) => g.dual_profile(x.u.u()),
            Profile::Scaled(c, p) => c * p.eval(x),
            Profile::Sum(a, b) => a.eval(x) + b.eval(x),
            Profile::Pullback { base, map } => {
                let (y, c) = map
                    .image_and_round_factor(x)
                    .expect("pullback maps are closed-form");
                base.eval(&y) * c
            }
        }
    }

    /// A lower bound for `F` that holds everywhere, when one is available in
    /// closed form.
    fn lower_bound(&self) -> Option<f64> {
        match self {
            Profile::Round => Some(1.0),
            Profile::Constant(c) => Some(*c),
            Profile::Cosine { offset, waves } => {
                Some(offset - waves.iter().map(Wave::weight_bound).sum::<f64>())
            }
            Profile::Metric(g) => Some(g.min_eigenvalue().sqrt()),
            Profile::Scaled(c, p) => p.lower_bound().map(|b| c * b),
            Profile::Sum(a, b) => Some(a.lower_bound()? + b.lower_bound()?),
            Profile::Pullback { .. } => None,
        }
    }

    fn is_q_independent(&self) -> bool {
        match self {
            Profile::Round | Profile::Constant(_) | Profile::Metric(_) => true,
            Profile::Cosine { waves, .. } => waves.iter().all(|w| w.q_freq.iter().all(|&k| k == 0)),
            Profile::Scaled(_, p) => p.is_q_independent(),
            Profile::Sum(a, b) => a.is_q_independent() && b.is_q_independent(),
            Profile::Pullback { .. } => false,
        }
    }
}

/// The contact form `F * lambda_round` on `S^{n-1} x T^n`.
#[derive(Debug, Clone)]
pub struct ContactForm {
    dim: usize,
    profile: Profile,
}

impl ContactForm {
    pub fn round(n: usize) -> Self {
        check_dim(n).expect("round form needs n in {2, 3}");
        ContactForm {
            dim: n,
            profile: Profile::Round,
        }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::validated(n, Profile::Constant(c))
    }

    /// `offset + sum amp * cos(2 pi <k, q>)` from `(amp, k)` pairs.
    pub fn cosine(n: usize, offset: f64, terms: &[(f64, Vec<i64>)]) -> Result<Self> {
        let waves = terms
            .iter()
            .map(|(a, k)| Wave::new(*a, k.clone()))
            .collect();
        Self::trigonometric(n, offset, waves)
    }

    pub fn trigonometric(n: usize, offset: f64, waves: Vec<Wave>) -> Result<Self> {
        check_dim(n)?;
        for w in &waves {
            if w.q_freq.len() != n {
                return Err(LabError::DimensionMismatch {
                    expected: n,
                    found: w.q_freq.len(),
                });
            }
            if let Some(d) = &w.dir {
                if d.len() != n {
                    return Err(LabError::DimensionMismatch {
                        expected: n,
                        found: d.len(),
                    });
                }
            }
            if !w.amp.is_finite() || !w.phase.is_finite() {
                return Err(LabError::InvalidForm("non-finite wave parameter".into()));
            }
        }
        Self::validated(n, Profile::Cosine { offset, waves })
    }

    pub fn metric(g: FlatMetric) -> Result<Self> {
        Self::validated(g.dim(), Profile::Metric(g))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::InvalidForm(format!(
                "scale factor {c} is not positive"
            )));
        }
        Ok(ContactForm {
            dim: self.dim,
            profile: Profile::Scaled(c, Box::new(self.profile.clone())),
        })
    }

    pub fn sum(&self, other: &ContactForm) -> Result<Self> {
        if self.dim != other.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(ContactForm {
            dim: self.dim,
            profile: Profile::Sum(
                Box::new(self.profile.clone()),
                Box::new(other.profile.clone()),
            ),
        })
    }

    /// `g^* self`. Flows are rejected so that evaluation stays closed-form.
    pub fn pullback(&self, g: &ContactMap) -> Result<Self> {
        if g.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: g.dim(),
            });
        }
        if !g.is_closed_form() {
            return Err(LabError::InvalidForm(
                "pullbacks require closed-form maps (no flows)".into(),
            ));
        }
        Ok(ContactForm {
            dim: self.dim,
            profile: Profile::Pullback {
                base: Box::new(self.profile.clone()),
                map: Box::new(g.clone()),
            },
        })
    }

    /// `(f^{-1})^* self`: the form transported by `f`.
    pub fn pushforward(&self, f: &ContactMap) -> Result<Self> {
        self.pullback(&f.inverse())
    }

    fn validated(n: usize, profile: Profile) -> Result<Self> {
        check_dim(n)?;
        let form = ContactForm { dim: n, profile };
        match form.profile.lower_bound() {
            Some(b) if b > 0.0 => {}
            Some(b) if b.is_nan() => {
                return Err(LabError::InvalidForm("profile bound is NaN".into()))
            }
            _ => {
                let (min, _) = form.sampled_range(POSITIVITY_GRID, POSITIVITY_GRID)?;
                if !(min > 0.0 && min.is_finite()) {
                    return Err(LabError::InvalidForm(format!(
                        "profile is not positive (sampled minimum {min:.6})"
                    )));
                }
            }
        }
        Ok(form)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn is_round(&self) -> bool {
        matches!(self.profile, Profile::Round)
    }

    /// Whether `F` depends on the direction only.
    pub fn is_q_independent(&self) -> bool {
        self.profile.is_q_independent()
    }

    pub fn profile_at(&self, x: &CEPoint) -> f64 {
        debug_assert_eq!(x.dim(), self.dim);
        self.profile.eval(x)
    }

    /// Sampled `(min F, max F)` over `per_axis^n` base points and a direction
    /// grid (`dirs` angles for `n = 2`, `4 dirs` Fibonacci points for `n = 3`).
    pub fn sampled_range(&self, per_axis: usize, dirs: usize) -> Result<(f64, f64)> {
        let dir_count = if self.dim == 2 { dirs } else { 4 * dirs };
        let grid = sphere_grid(self.dim, dir_count)?;
        let base = if self.is_q_independent() {
            vec![crate::geometry::TorusPoint::origin(self.dim)]
        } else {
            torus_grid(self.dim, per_axis)
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for q in &base {
            for u in &grid {
                let v = self.profile_at(&CEPoint { u: *u, q: *q });
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Ok((lo, hi))
    }
}
