//! Contactomorphisms of `S^{n-1} x T^n` as finite compositions of catalog
//! primitives, with conformal factors and cohomology actions.

pub mod hamiltonian;
pub mod primitive;

pub use hamiltonian::Hamiltonian;
pub use primitive::{Primitive, ShearAxis};

use nalgebra::DMatrix;

use crate::algebra::IntMatrix;
use crate::error::{LabError, Result};
use crate::form::ContactForm;
use crate::geometry::{
    chart_coords, check_dim, from_chart, to_chart, wrap, CEPoint, Direction, SphereChart,
};
use crate::jet::{Jet, Scalar};

/// Smallest accepted `|lambda(v)|` on the transversal used for conformal factors.
pub const TRANSVERSAL_FLOOR: f64 = 1e-12;

/// Largest accepted [`ContactMap::contact_residual`] for an integrated flow.
pub const FLOW_RESIDUAL_TOL: f64 = 1e-6;

/// Sample points used by [`ContactMap::check_flows`] per flow primitive.
const FLOW_CHECK_SAMPLES: usize = 16;

/// A composite `p_k o ... o p_1` of primitives listed as `[p_1, ..., p_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    dim: usize,
    primitives: Vec<Primitive>,
    homology: IntMatrix,
}

impl ContactMap {
    /// Composite applying `primitives` left to right.
    pub fn new(dim: usize, primitives: Vec<Primitive>) -> Result<Self> {
        check_dim(dim)?;
        let mut homology = IntMatrix::identity(3);
        for p in &primitives {
            p.check_dim(dim)?;
            homology = p.homology(dim).checked_mul(&homology)?;
        }
        Ok(ContactMap {
            dim,
            primitives,
            homology,
        })
    }

    pub fn identity(dim: usize) -> Self {
        ContactMap::new(dim, Vec::new()).expect("identity in a supported dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn describe(&self) -> String {
        if self.primitives.is_empty() {
            return "id".into();
        }
        self.primitives
            .iter()
            .rev()
            .map(|p| format!("{p:?}"))
            .collect::<Vec<_>>()
            .join(" o ")
    }

    /// `I_f`, the inverse of the induced automorphism of `H^1`, as a 3x3
    /// integer matrix (see [`Primitive::homology`] for the bases).
    pub fn homology_action(&self) -> &IntMatrix {
        &self.homology
    }

    pub fn is_closed_form(&self) -> bool {
        !self.primitives.iter().any(Primitive::is_flow)
    }

    /// Whether every primitive preserves the round form.
    pub fn is_strict(&self) -> bool {
        self.primitives.iter().all(Primitive::is_strict)
    }

    pub fn inverse(&self) -> ContactMap {
        let primitives = self
            .primitives
            .iter()
            .rev()
            .map(Primitive::inverse)
            .collect();
        ContactMap::new(self.dim, primitives).expect("inverse of a valid composite")
    }

    /// `other o self`: apply `self` first.
    pub fn then(&self, other: &ContactMap) -> Result<ContactMap> {
        if self.dim != other.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut primitives = self.primitives.clone();
        primitives.extend(other.primitives.iter().cloned());
        ContactMap::new(self.dim, primitives)
    }

    /// `f o g` with `f = self`.
    pub fn compose(&self, g: &ContactMap) -> Result<ContactMap> {
        g.then(self)
    }

    /// `h^{-1} o self o h`.
    pub fn conjugate_by(&self, h: &ContactMap) -> Result<ContactMap> {
        h.then(self)?.then(&h.inverse())
    }

    pub fn power(&self, k: usize) -> Result<ContactMap> {
        let mut primitives = Vec::with_capacity(self.primitives.len() * k);
        for _ in 0..k {
            primitives.extend(self.primitives.iter().cloned());
        }
        ContactMap::new(self.dim, primitives)
    }

    pub(crate) fn apply_generic<S: Scalar>(
        &self,
        u: [S; 3],
        q: [S; 3],
    ) -> Result<([S; 3], [S; 3])> {
        let (mut u, mut q) = (u, q);
        for p in &self.primitives {
            (u, q) = p.apply(u, q, self.dim)?;
        }
        Ok((u, q))
    }

    fn check_point(&self, x: &CEPoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &CEPoint) -> Result<CEPoint> {
        self.check_point(x)?;
        let (u, q) = self.apply_generic(x.u.raw(), x.q.raw())?;
        Ok(to_point(u, q, self.dim))
    }

    /// `f(x)` together with `(f^* lambda / lambda)(x)`.
    ///
    /// The ratio is evaluated on the coordinate field `d/dq_j` with `j` the
    /// largest component of `u`, where `lambda` has its largest coefficient.
    pub fn image_and_factor(&self, form: &ContactForm, x: &CEPoint) -> Result<(CEPoint, f64)> {
        if form.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: form.dim(),
            });
        }
        let (y, ratio) = self.round_ratio(x)?;
        if form.is_round() {
            return Ok((y, ratio));
        }
        Ok((y, ratio * form.profile_at(&y) / form.profile_at(x)))
    }

    /// `f(x)` and the conformal factor of `f` for the round form.
    pub fn image_and_round_factor(&self, x: &CEPoint) -> Result<(CEPoint, f64)> {
        self.round_ratio(x)
    }

    fn round_ratio(&self, x: &CEPoint) -> Result<(CEPoint, f64)> {
        self.check_point(x)?;
        let u0 = x.u.raw();
        let j = (0..self.dim)
            .max_by(|&a, &b| u0[a].abs().total_cmp(&u0[b].abs()))
            .expect("dim >= 2");
        let lambda_v = u0[j];
        if lambda_v.abs() < TRANSVERSAL_FLOOR {
            return Err(LabError::DegenerateTransversal(lambda_v));
        }
        let u: [Jet<1>; 3] = u0.map(Jet::constant);
        let mut q: [Jet<1>; 3] = x.q.raw().map(Jet::constant);
        q[j] = Jet::variable(q[j].v, 0);
        let (u1, q1) = self.apply_generic(u, q)?;
        let pulled: f64 = (0..self.dim).map(|i| u1[i].v * q1[i].d[0]).sum();
        let y = to_point(u1.map(|c| c.v), q1.map(|c| c.v), self.dim);
        Ok((y, pulled / lambda_v))
    }

    pub fn conformal_factor(&self, form: &ContactForm, x: &CEPoint) -> Result<f64> {
        Ok(self.image_and_factor(form, x)?.1)
    }

    /// How far `f^* lambda_round` is from a multiple of `lambda_round` at `x`,
    /// relative to the best-fitting multiple. Zero for exact contactomorphisms;
    /// for integrated flows it measures the discretization error.
    pub fn contact_residual(&self, x: &CEPoint) -> Result<f64> {
        self.check_point(x)?;
        match self.dim {
            2 => self.contact_residual_n::<3>(x),
            _ => self.contact_residual_n::<5>(x),
        }
    }

    fn contact_residual_n<const N: usize>(&self, x: &CEPoint) -> Result<f64> {
        let (coords, chart) = chart_coords(x);
        let vars: Vec<Jet<N>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| Jet::variable(c, i))
            .collect();
        let (u, q) = from_chart(&vars, chart);
        let (u1, q1) = self.apply_generic(u, q)?;
        let norm = (0..self.dim).map(|i| u1[i].v * u1[i].v).sum::<f64>().sqrt();
        // coefficients of the pulled-back and original forms in chart coordinates
        let pulled: Vec<f64> = (0..N)
            .map(|c| (0..self.dim).map(|i| u1[i].v * q1[i].d[c]).sum::<f64>() / norm)
            .collect();
        let mut lambda = vec![0.0; N];
        lambda[N - self.dim..].copy_from_slice(x.u.u());
        let c = pulled.iter().zip(&lambda).map(|(a, b)| a * b).sum::<f64>();
        let off = pulled
            .iter()
            .zip(&lambda)
            .map(|(a, b)| (a - c * b).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(off / c.abs())
    }

    /// Checks every flow primitive on a fixed sample of points and fails
    /// when the contact residual exceeds [`FLOW_RESIDUAL_TOL`]. Returns the
    /// worst residual seen.
    pub fn check_flows(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in self.primitives.iter().filter(|p| p.is_flow()) {
            let single = ContactMap::new(self.dim, vec![p.clone()])?;
            for k in 0..FLOW_CHECK_SAMPLES {
                let x = check_point_sample(self.dim, k);
                let r = single.contact_residual(&x)?;
                if r.is_nan() || r > FLOW_RESIDUAL_TOL {
                    return Err(LabError::InvalidPrimitive(format!(
                        "{p:?} has contact residual {r:.2e} (increase the step count)"
                    )));
                }
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    /// Jacobian of `f` in chart coordinates at `x`, and `f(x)`. For `n = 3`
    /// the sphere charts at `x` and `f(x)` are chosen by hemisphere.
    pub fn chart_jacobian(&self, x: &CEPoint) -> Result<(DMatrix<f64>, CEPoint)> {
        self.check_point(x)?;
        match self.dim {
            2 => self.chart_jacobian_n::<3>(x),
            _ => self.chart_jacobian_n::<5>(x),
        }
    }

    fn chart_jacobian_n<const N: usize>(&self, x: &CEPoint) -> Result<(DMatrix<f64>, CEPoint)> {
        let (coords, chart) = chart_coords(x);
        let vars: Vec<Jet<N>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| Jet::variable(c, i))
            .collect();
        let (u, q) = from_chart(&vars, chart);
        let (u1, q1) = self.apply_generic(u, q)?;
        let y = to_point(u1.map(|c| c.v), q1.map(|c| c.v), self.dim);
        let out_chart = (self.dim == 3).then(|| SphereChart::for_direction(y.u.u()));
        let out = to_chart(&u1, &q1, self.dim, out_chart);
        let jac = DMatrix::from_fn(N, N, |r, c| out[r].d[c]);
        Ok((jac, y))
    }
}

/// Deterministic, well-spread sample points (golden-ratio sequences).
fn check_point_sample(n: usize, k: usize) -> CEPoint {
    const G: [f64; 5] = [
        0.618_033_988_75,
        0.754_877_666_25,
        0.569_840_290_99,
        0.453_397_651_52,
        0.362_488_004_78,
    ];
    let c: Vec<f64> = (0..2 * n - 1)
        .map(|i| ((k as f64 + 0.5) * G[i]).fract())
        .collect();
    let u = if n == 2 {
        Direction::from_angle(c[0])
    } else {
        let z = 2.0 * c[0] - 1.0;
        let r = (1.0 - z * z).sqrt();
        let a = std::f64::consts::TAU * c[1];
        Direction::new(&[r * a.cos(), r * a.sin(), z]).expect("unit vector")
    };
    CEPoint {
        u,
        q: wrap(&c[n - 1..]),
    }
}

fn to_point(u: [f64; 3], q: [f64; 3], n: usize) -> CEPoint {
    let norm = u[..n].iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = u;
    for c in v.iter_mut().take(n) {
        *c /= norm;
    }
    CEPoint {
        u: Direction::from_raw(v, n),
        q: wrap(&q[..n]),
    }
}
