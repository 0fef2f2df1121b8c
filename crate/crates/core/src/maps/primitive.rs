//! Building blocks of the map catalog. Every primitive has a closed-form
//! inverse and a declared action on first cohomology.

use std::f64::consts::{PI, TAU};
use std::fmt;

use super::hamiltonian::{default_steps, flow, Hamiltonian};
use crate::algebra::IntMatrix;
use crate::error::{LabError, Result};
use crate::jet::Scalar;

/// The two strict shears of `S^1 x T^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShearAxis {
    /// `(theta, q1 + theta - sin(4 pi theta)/4pi, q2 + cos(4 pi theta)/4pi)`.
    A,
    /// `(theta, q1 + cos(4 pi theta)/4pi, q2 + theta + sin(4 pi theta)/4pi)`.
    B,
}

#[derive(Clone, PartialEq)]
pub enum Primitive {
    /// `(u, q) -> (M^{-T} u / ||M^{-T} u||, M q)`.
    CanonicalLift {
        m: IntMatrix,
        inv_t: IntMatrix,
    },
    Shear {
        axis: ShearAxis,
        inverted: bool,
    },
    /// `(u, q) -> (u, q + t u)`: Reeb flow of the round form.
    ReebTranslation(f64),
    ContactFlow {
        h: Hamiltonian,
        t: f64,
        steps: usize,
    },
}

impl fmt::Debug for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::CanonicalLift { m, .. } => write!(f, "lift{m}"),
            Primitive::Shear { axis, inverted } => {
                let name = match axis {
                    ShearAxis::A => "shear_a",
                    ShearAxis::B => "shear_b",
                };
                write!(f, "{name}{}", if *inverted { "^-1" } else { "" })
            }
            Primitive::ReebTranslation(t) => write!(f, "reeb({t})"),
            Primitive::ContactFlow { h, t, steps } => {
                write!(f, "flow({h:?}, t={t}, steps={steps})")
            }
        }
    }
}

impl Primitive {
    pub fn canonical_lift(m: IntMatrix) -> Result<Self> {
        if m.size() != 2 && m.size() != 3 {
            return Err(LabError::UnsupportedDimension(m.size()));
        }
        if !m.is_unimodular() {
            return Err(LabError::NotUnimodular(m.det()));
        }
        let inv_t = m.inverse_transpose()?;
        Ok(Primitive::CanonicalLift { m, inv_t })
    }

    pub fn shear_a() -> Self {
        Primitive::Shear {
            axis: ShearAxis::A,
            inverted: false,
        }
    }

    pub fn shear_b() -> Self {
        Primitive::Shear {
            axis: ShearAxis::B,
            inverted: false,
        }
    }

    pub fn reeb(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(LabError::InvalidPrimitive("non-finite Reeb time".into()));
        }
        Ok(Primitive::ReebTranslation(t))
    }

    /// Time-`t` flow map; `steps` defaults to 256 per unit time.
    pub fn flow(h: Hamiltonian, t: f64, steps: Option<usize>) -> Result<Self> {
        if !t.is_finite() {
            return Err(LabError::InvalidPrimitive("non-finite flow time".into()));
        }
        let steps = steps.unwrap_or_else(|| default_steps(t));
        if steps == 0 {
            return Err(LabError::InvalidPrimitive(
                "flow needs at least one step".into(),
            ));
        }
        Ok(Primitive::ContactFlow { h, t, steps })
    }

    /// Dimension imposed by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Primitive::CanonicalLift { m, .. } => Some(m.size()),
            Primitive::Shear { .. } => Some(2),
            Primitive::ReebTranslation(_) => None,
            Primitive::ContactFlow { h, .. } => h.dim(),
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if let Primitive::ContactFlow { h, .. } = self {
            h.check_dim(n)?;
        }
        match self.dim() {
            Some(d) if d != n => Err(LabError::DimensionMismatch {
                expected: n,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    pub fn inverse(&self) -> Primitive {
        match self {
            Primitive::CanonicalLift { m, inv_t } => Primitive::CanonicalLift {
                m: inv_t.transpose(),
                inv_t: m.transpose(),
            },
            Primitive::Shear { axis, inverted } => Primitive::Shear {
                axis: *axis,
                inverted: !inverted,
            },
            Primitive::ReebTranslation(t) => Primitive::ReebTranslation(-t),
            Primitive::ContactFlow { h, t, steps } => Primitive::ContactFlow {
                h: h.clone(),
                t: -t,
                steps: *steps,
            },
        }
    }

    pub fn is_flow(&self) -> bool {
        matches!(self, Primitive::ContactFlow { .. })
    }

    /// Whether the primitive preserves the round form exactly.
    pub fn is_strict(&self) -> bool {
        match self {
            Primitive::CanonicalLift { m, .. } => {
                // M^{-T} must be orthogonal: a signed permutation
                (0..m.size()).all(|r| (0..m.size()).map(|c| m.get(r, c).abs()).sum::<i64>() == 1)
            }
            Primitive::Shear { .. } | Primitive::ReebTranslation(_) => true,
            Primitive::ContactFlow { h, .. } => {
                matches!(h, Hamiltonian::Translation(_))
            }
        }
    }

    /// Inverse of the induced map on `H^1`: `(dtheta, dq1, dq2)` for `n = 2`,
    /// `(dq1, dq2, dq3)` for `n = 3`. Columns are images of basis classes.
    pub fn homology(&self, n: usize) -> IntMatrix {
        match self {
            Primitive::CanonicalLift { m, inv_t } => {
                if n == 2 {
                    inv_t.with_leading(m.det() as i64)
                } else {
                    inv_t.clone()
                }
            }
            Primitive::Shear { axis, inverted } => {
                let s = if *inverted { 1 } else { -1 };
                match axis {
                    ShearAxis::A => IntMatrix::from_rows([[1, s, 0], [0, 1, 0], [0, 0, 1]]),
                    ShearAxis::B => IntMatrix::from_rows([[1, 0, s], [0, 1, 0], [0, 0, 1]]),
                }
            }
            Primitive::ReebTranslation(_) | Primitive::ContactFlow { .. } => IntMatrix::identity(3),
        }
    }

    /// Image of `(u, q)` with `q` left unwrapped.
    pub(crate) fn apply<S: Scalar>(
        &self,
        u: [S; 3],
        q: [S; 3],
        n: usize,
    ) -> Result<([S; 3], [S; 3])> {
        let zero = S::cst(0.0);
        match self {
            Primitive::CanonicalLift { m, inv_t } => {
                let mut v = [zero; 3];
                let mut q2 = [zero; 3];
                let mut norm2 = zero;
                for r in 0..n {
                    for c in 0..n {
                        v[r] += u[c].scale(inv_t.get(r, c) as f64);
                        q2[r] += q[c].scale(m.get(r, c) as f64);
                    }
                    norm2 += v[r] * v[r];
                }
                let norm = norm2.sqrt();
                for vr in v.iter_mut().take(n) {
                    *vr = *vr / norm;
                }
                Ok((v, q2))
            }
            Primitive::Shear { axis, inverted } => {
                let sign = if *inverted { -1.0 } else { 1.0 };
                let theta = u[1].atan2(u[0]).scale(1.0 / TAU);
                let a = theta.scale(2.0 * TAU);
                let (s, c) = (
                    a.sin().scale(1.0 / (4.0 * PI)),
                    a.cos().scale(1.0 / (4.0 * PI)),
                );
                let (d1, d2) = match axis {
                    ShearAxis::A => (theta - s, c),
                    ShearAxis::B => (c, theta + s),
                };
                Ok((u, [q[0] + d1.scale(sign), q[1] + d2.scale(sign), zero]))
            }
            Primitive::ReebTranslation(t) => {
                let mut q2 = q;
                for c in 0..n {
                    q2[c] += u[c].scale(*t);
                }
                Ok((u, q2))
            }
            Primitive::ContactFlow { h, t, steps } => flow(h, *t, *steps, u, q, n),
        }
    }
}
