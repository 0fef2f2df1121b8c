//! Coordinates on the torus `T^n` and on its space of cooriented contact
//! elements, identified with the unit cosphere bundle `S^{n-1} x T^n` of the
//! round metric. Base coordinates are fractions of a full period.

use crate::error::{LabError, Result};
use crate::form::ContactForm;
use crate::jet::Scalar;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Geometric identity checks.
pub const GEOMETRY_TOL: f64 = 1e-9;
/// Forward-mode vs central finite differences.
pub const AD_FD_TOL: f64 = 1e-5;
/// Step of the central finite differences used as the AD oracle.
pub const FD_STEP: f64 = 1e-5;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(LabError::UnsupportedDimension(n))
    }
}

/// Reduce a real number into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of `T^n`, `n` in {2, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: [f64; 3],
    dim: usize,
}

impl TorusPoint {
    pub fn new(q: &[f64]) -> Result<Self> {
        check_dim(q.len())?;
        Ok(wrap(q))
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint {
            coords: [0.0; 3],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub(crate) fn raw(&self) -> [f64; 3] {
        self.coords
    }
}

/// Reduce every coordinate mod 1. The slice length must be 2 or 3.
pub fn wrap(q: &[f64]) -> TorusPoint {
    assert!(
        q.len() == 2 || q.len() == 3,
        "torus dimension must be 2 or 3"
    );
    let mut coords = [0.0; 3];
    for (c, &x) in coords.iter_mut().zip(q) {
        *c = wrap_unit(x);
    }
    TorusPoint {
        coords,
        dim: q.len(),
    }
}

/// A unit covector direction in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    u: [f64; 3],
    dim: usize,
}

impl Direction {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: &[f64]) -> Result<Self> {
        check_dim(v.len())?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LabError::ZeroCovector);
        }
        let mut u = [0.0; 3];
        for (c, &x) in u.iter_mut().zip(v) {
            *c = x / norm;
        }
        Ok(Direction { u, dim: v.len() })
    }

    /// Planar direction `(cos 2 pi theta, sin 2 pi theta)`, theta in revolutions.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = (TAU * theta).sin_cos();
        Direction {
            u: [c, s, 0.0],
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u(&self) -> &[f64] {
        &self.u[..self.dim]
    }

    /// Angle in revolutions, in `[0, 1)`; only meaningful for `n = 2`.
    pub fn angle(&self) -> f64 {
        wrap_unit(self.u[1].atan2(self.u[0]) / TAU)
    }

    pub(crate) fn raw(&self) -> [f64; 3] {
        self.u
    }

    pub(crate) fn from_raw(u: [f64; 3], dim: usize) -> Self {
        Direction { u, dim }
    }
}

/// A point of the space of cooriented contact elements over `T^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CEPoint {
    pub u: Direction,
    pub q: TorusPoint,
}

impl CEPoint {
    pub fn new(u: Direction, q: TorusPoint) -> Result<Self> {
        if u.dim() != q.dim() {
            return Err(LabError::DimensionMismatch {
                expected: u.dim(),
                found: q.dim(),
            });
        }
        Ok(CEPoint { u, q })
    }

    /// `n = 2` point from chart coordinates `(theta, q1, q2)`.
    pub fn planar(theta: f64, q1: f64, q2: f64) -> Self {
        CEPoint {
            u: Direction::from_angle(theta),
            q: wrap(&[q1, q2]),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// Distance on `S^{n-1} x T^n`: chordal on the sphere, periodic on the torus.
    pub fn distance(&self, other: &CEPoint) -> f64 {
        let du: f64 = self
            .u
            .u()
            .iter()
            .zip(other.u.u())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let dq: f64 = self
            .q
            .q()
            .iter()
            .zip(other.q.q())
            .map(|(a, b)| {
                let d = (a - b) - (a - b).round();
                d * d
            })
            .sum();
        (du + dq).sqrt()
    }
}

/// A point `(p, q)` of `T*_0 T^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotangentPoint {
    p: [f64; 3],
    pub q: TorusPoint,
}

impl CotangentPoint {
    pub fn new(p: &[f64], q: TorusPoint) -> Result<Self> {
        if p.len() != q.dim() {
            return Err(LabError::DimensionMismatch {
                expected: q.dim(),
                found: p.len(),
            });
        }
        if p.iter().all(|&x| x == 0.0) {
            return Err(LabError::ZeroCovector);
        }
        let mut a = [0.0; 3];
        a[..p.len()].copy_from_slice(p);
        Ok(CotangentPoint { p: a, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p[..self.q.dim()]
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.p().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The contact element represented by this covector.
    pub fn projection(&self) -> CEPoint {
        CEPoint {
            u: Direction::new(self.p()).expect("nonzero by construction"),
            q: self.q,
        }
    }
}

/// `|z| = p / lambda`: the ratio of `p` to the section `{ ||p|| = F(u, q) }`.
pub fn norm_of(z: &CotangentPoint, form: &ContactForm) -> Result<f64> {
    if z.q.dim() != form.dim() {
        return Err(LabError::DimensionMismatch {
            expected: form.dim(),
            found: z.q.dim(),
        });
    }
    let r = z.euclidean_norm();
    if r == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    Ok(r / form.profile_at(&z.projection()))
}

/// Coefficients of `lambda` at `x` in chart coordinates: `(dtheta, dq1, dq2)`
/// for `n = 2`, `(ds1, ds2, dq1, dq2, dq3)` for `n = 3`.
pub fn eval_form(form: &ContactForm, x: &CEPoint) -> Vec<f64> {
    let n = x.dim();
    let f = form.profile_at(x);
    let mut out = vec![0.0; 2 * n - 1];
    for (i, &ui) in x.u.u().iter().enumerate() {
        out[n - 1 + i] = f * ui;
    }
    out
}

/// Direction grid: `resolution` equally spaced angles for `n = 2`, a
/// Fibonacci lattice with `resolution` points for `n = 3`.
pub fn sphere_grid(n: usize, resolution: usize) -> Result<Vec<Direction>> {
    check_dim(n)?;
    if resolution < 4 {
        return Err(LabError::InvalidArgument(format!(
            "direction resolution must be >= 4, got {resolution}"
        )));
    }
    Ok(match n {
        2 => (0..resolution)
            .map(|i| Direction::from_angle(i as f64 / resolution as f64))
            .collect(),
        _ => fibonacci_sphere(resolution),
    })
}

fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Direction::from_raw([r * phi.cos(), r * phi.sin(), z], 3)
        })
        .collect()
}

/// Regular grid with `per_axis` points per base coordinate.
pub fn torus_grid(n: usize, per_axis: usize) -> Vec<TorusPoint> {
    let h = 1.0 / per_axis as f64;
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = [0.0; 3];
            for c in coords.iter_mut().take(n) {
                *c = (idx % per_axis) as f64 * h;
                idx /= per_axis;
            }
            TorusPoint { coords, dim: n }
        })
        .collect()
}

/// Chart on `S^2` used for `n = 3`: stereographic projection from the pole
/// opposite to the hemisphere containing the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereChart {
    /// Projection from `(0, 0, 1)`; used when `u3 <= 0`.
    North,
    /// Projection from `(0, 0, -1)`; used when `u3 > 0`.
    South,
}

impl SphereChart {
    pub fn for_direction(u: &[f64]) -> Self {
        if u[2] > 0.0 {
            SphereChart::South
        } else {
            SphereChart::North
        }
    }

    fn sign(self) -> f64 {
        match self {
            SphereChart::North => 1.0,
            SphereChart::South => -1.0,
        }
    }

    pub fn project<S: Scalar>(self, u: &[S; 3]) -> [S; 2] {
        let den = S::cst(1.0) - u[2].scale(self.sign());
        [u[0] / den, u[1] / den]
    }

    pub fn lift<S: Scalar>(self, s: [S; 2]) -> [S; 3] {
        let r2 = s[0] * s[0] + s[1] * s[1];
        let den = S::cst(1.0) + r2;
        [
            s[0].scale(2.0) / den,
            s[1].scale(2.0) / den,
            ((r2 - S::cst(1.0)) / den).scale(self.sign()),
        ]
    }
}

/// Chart coordinates of `x`. For `n = 3` the chart is chosen from `x`.
pub fn chart_coords(x: &CEPoint) -> (Vec<f64>, Option<SphereChart>) {
    let q = x.q.q();
    match x.dim() {
        2 => (vec![x.u.angle(), q[0], q[1]], None),
        _ => {
            let chart = SphereChart::for_direction(x.u.u());
            let s = chart.project(&x.u.raw());
            (vec![s[0], s[1], q[0], q[1], q[2]], Some(chart))
        }
    }
}

/// Inverse of [`chart_coords`] on generic scalars, without wrapping `q`.
pub(crate) fn from_chart<S: Scalar>(coords: &[S], chart: Option<SphereChart>) -> ([S; 3], [S; 3]) {
    let zero = S::cst(0.0);
    match chart {
        None => {
            let a = coords[0].scale(TAU);
            ([a.cos(), a.sin(), zero], [coords[1], coords[2], zero])
        }
        Some(c) => (
            c.lift([coords[0], coords[1]]),
            [coords[2], coords[3], coords[4]],
        ),
    }
}

/// Chart coordinates of a generic `(u, q)` state; `chart` selects the sphere
/// chart for `n = 3`.
pub(crate) fn to_chart<S: Scalar>(
    u: &[S; 3],
    q: &[S; 3],
    dim: usize,
    chart: Option<SphereChart>,
) -> Vec<S> {
    match (dim, chart) {
        (2, _) => vec![u[1].atan2(u[0]).scale(1.0 / TAU), q[0], q[1]],
        (_, Some(c)) => {
            let s = c.project(u);
            vec![s[0], s[1], q[0], q[1], q[2]]
        }
        (_, None) => unreachable!("n = 3 requires a sphere chart"),
    }
}
