//! Degree-one homogeneous Hamiltonians on `T*_0 T^n` and the time-`t` maps of
//! their flows, integrated with classical RK4 and renormalized to the unit
//! cosphere bundle after every step.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{LabError, Result};
use crate::jet::Scalar;
use crate::shapes::FlatMetric;

/// Default integration steps per unit time.
pub const STEPS_PER_UNIT_TIME: f64 = 256.0;

/// Largest accepted change of a base coordinate in one integration step.
const MAX_STEP_INCREMENT: f64 = 0.5;

#[derive(Clone, PartialEq)]
pub enum Hamiltonian {
    /// `H = sqrt(p^T G^{-1} p)`: geodesic flow of a flat metric.
    Metric(FlatMetric),
    /// `H = ||p|| (1 + amp cos(2 pi <k, q> + phase))`, `|amp| < 1`. Its flow is
    /// the Reeb flow of `lambda_round / (1 + amp cos(...))`.
    Conformal {
        amp: f64,
        q_freq: Vec<i64>,
        phase: f64,
    },
    /// `H = <w, p>`: rigid translation of the base.
    Translation(Vec<f64>),
    /// `H = amp * p_i * sin(2 pi q_j)`, `i != j`: lift of a base shear.
    Twist { amp: f64, i: usize, j: usize },
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Metric(g) => write!(f, "metric{:?}", g.entries()),
            Hamiltonian::Conformal { amp, q_freq, phase } => {
                write!(f, "conformal(amp={amp}, k={q_freq:?}, phase={phase})")
            }
            Hamiltonian::Translation(w) => write!(f, "translation{w:?}"),
            Hamiltonian::Twist { amp, i, j } => write!(f, "twist(amp={amp}, i={i}, j={j})"),
        }
    }
}

impl Hamiltonian {
    pub fn conformal(amp: f64, q_freq: Vec<i64>, phase: f64) -> Result<Self> {
        if amp.is_nan() || amp.abs() >= 1.0 || !phase.is_finite() {
            return Err(LabError::InvalidPrimitive(format!(
                "conformal Hamiltonian needs |amp| < 1, got {amp}"
            )));
        }
        Ok(Hamiltonian::Conformal { amp, q_freq, phase })
    }

    pub fn translation(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(LabError::InvalidPrimitive("non-finite translation".into()));
        }
        Ok(Hamiltonian::Translation(w))
    }

    pub fn twist(amp: f64, i: usize, j: usize) -> Result<Self> {
        if i == j || !amp.is_finite() {
            return Err(LabError::InvalidPrimitive(format!(
                "twist needs distinct axes and finite amplitude, got i={i}, j={j}"
            )));
        }
        Ok(Hamiltonian::Twist { amp, i, j })
    }

    /// Dimension fixed by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Hamiltonian::Metric(g) => Some(g.dim()),
            Hamiltonian::Conformal { q_freq, .. } => Some(q_freq.len()),
            Hamiltonian::Translation(w) => Some(w.len()),
            Hamiltonian::Twist { .. } => None,
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if let Hamiltonian::Twist { i, j, .. } = self {
            if *i >= n || *j >= n {
                return Err(LabError::InvalidPrimitive(format!(
                    "twist axes ({i}, {j}) out of range for n = {n}"
                )));
            }
        }
        match self.dim() {
            Some(d) if d != n => Err(LabError::DimensionMismatch {
                expected: n,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    pub fn value(&self, p: &[f64], q: &[f64]) -> f64 {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        match self {
            Hamiltonian::Metric(g) => g.dual_norm(p),
            Hamiltonian::Conformal { amp, q_freq, phase } => {
                let arg: f64 = q_freq.iter().zip(q).map(|(&k, &x)| k as f64 * x).sum();
                norm * (1.0 + amp * (TAU * arg + phase).cos())
            }
            Hamiltonian::Translation(w) => w.iter().zip(p).map(|(a, b)| a * b).sum(),
            Hamiltonian::Twist { amp, i, j } => amp * p[*i] * (TAU * q[*j]).sin(),
        }
    }

    /// Hamiltonian vector field `(p', q') = (-dH/dq, dH/dp)`.
    pub(crate) fn field<S: Scalar>(&self, p: &[S; 3], q: &[S; 3], n: usize) -> ([S; 3], [S; 3]) {
        let zero = S::cst(0.0);
        let mut dp = [zero; 3];
        let mut dq = [zero; 3];
        match self {
            Hamiltonian::Metric(g) => {
                let ginv = g.inverse_entries();
                let mut ap = [zero; 3];
                for (r, apr) in ap.iter_mut().enumerate().take(n) {
                    for (c, &pc) in p.iter().enumerate().take(n) {
                        *apr += pc.scale(ginv[r * n + c]);
                    }
                }
                let mut h2 = zero;
                for r in 0..n {
                    h2 += p[r] * ap[r];
                }
                let h = h2.sqrt();
                for r in 0..n {
                    dq[r] = ap[r] / h;
                }
            }
            Hamiltonian::Conformal { amp, q_freq, phase } => {
                let mut r2 = zero;
                let mut arg = S::cst(*phase);
                for c in 0..n {
                    r2 += p[c] * p[c];
                    arg += q[c].scale(TAU * q_freq[c] as f64);
                }
                let r = r2.sqrt();
                let h = S::cst(1.0) + arg.cos().scale(*amp);
                let s = (r * arg.sin()).scale(amp * TAU);
                for c in 0..n {
                    dq[c] = h * p[c] / r;
                    dp[c] = s.scale(q_freq[c] as f64);
                }
            }
            Hamiltonian::Translation(w) => {
                for c in 0..n {
                    dq[c] = S::cst(w[c]);
                }
            }
            Hamiltonian::Twist { amp, i, j } => {
                let a = q[*j].scale(TAU);
                dq[*i] = a.sin().scale(*amp);
                dp[*j] = -(p[*i] * a.cos()).scale(amp * TAU);
            }
        }
        (dp, dq)
    }
}

pub(crate) fn default_steps(t: f64) -> usize {
    ((STEPS_PER_UNIT_TIME * t.abs()).ceil() as usize).max(1)
}

/// Time-`t` map of the flow of `h` from the contact element `(u, q)`.
pub(crate) fn flow<S: Scalar>(
    h: &Hamiltonian,
    t: f64,
    steps: usize,
    u: [S; 3],
    q: [S; 3],
    n: usize,
) -> Result<([S; 3], [S; 3])> {
    let dt = t / steps as f64;
    let (mut p, mut q) = (u, q);
    let axpy = |x: &[S; 3], k: &[S; 3], a: f64| -> [S; 3] {
        let mut out = *x;
        for c in 0..n {
            out[c] += k[c].scale(a);
        }
        out
    };
    for step in 0..steps {
        let (k1p, k1q) = h.field(&p, &q, n);
        let (k2p, k2q) = h.field(&axpy(&p, &k1p, dt / 2.0), &axpy(&q, &k1q, dt / 2.0), n);
        let (k3p, k3q) = h.field(&axpy(&p, &k2p, dt / 2.0), &axpy(&q, &k2q, dt / 2.0), n);
        let (k4p, k4q) = h.field(&axpy(&p, &k3p, dt), &axpy(&q, &k3q, dt), n);
        let mut norm2 = S::cst(0.0);
        for c in 0..n {
            let incr_q = (k1q[c] + k2q[c].scale(2.0) + k3q[c].scale(2.0) + k4q[c]).scale(dt / 6.0);
            let incr_p = (k1p[c] + k2p[c].scale(2.0) + k3p[c].scale(2.0) + k4p[c]).scale(dt / 6.0);
            let dv = incr_q.value();
            if !dv.is_finite() || dv.abs() > MAX_STEP_INCREMENT || !incr_p.value().is_finite() {
                return Err(LabError::FlowDivergence { step });
            }
            q[c] += incr_q;
            p[c] += incr_p;
            norm2 += p[c] * p[c];
        }
        let norm = norm2.sqrt();
        if !(norm.value() > 0.0 && norm.value().is_finite()) {
            return Err(LabError::FlowDivergence { step });
        }
        for pc in p.iter_mut().take(n) {
            *pc = *pc / norm;
        }
    }
    Ok((p, q))
}
