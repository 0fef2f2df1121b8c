//! Shared fixtures: seeded randomness, catalog maps, and chart oracles written
//! independently of the library's chart code.
#![allow(dead_code)]

use contactlab_core::{
    CEPoint, ContactMap, Direction, FlatMetric, Hamiltonian, IntMatrix, Primitive, TorusPoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(n: usize, rng: &mut ChaCha8Rng) -> CEPoint {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 0.01 && r2 <= 1.0 {
            let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            return CEPoint::new(Direction::new(&v).unwrap(), TorusPoint::new(&q).unwrap())
                .unwrap();
        }
    }
}

/// Random matrix in SL(n, Z) with entries in `[-max, max]`, optionally
/// hyperbolic.
pub fn random_sl(n: usize, max: i64, hyperbolic: bool, rng: &mut ChaCha8Rng) -> IntMatrix {
    loop {
        let e: Vec<i64> = (0..n * n).map(|_| rng.random_range(-max..=max)).collect();
        let m = IntMatrix::new(n, e).unwrap();
        if m.det() != 1 {
            continue;
        }
        if !hyperbolic || contactlab_core::is_hyperbolic(&m).unwrap() {
            return m;
        }
    }
}

pub fn lift(m: IntMatrix) -> ContactMap {
    let n = m.size();
    ContactMap::new(n, vec![Primitive::canonical_lift(m).unwrap()]).unwrap()
}

pub fn cat() -> IntMatrix {
    IntMatrix::from_rows([[2, 1], [1, 1]])
}

pub fn single(n: usize, p: Primitive) -> ContactMap {
    ContactMap::new(n, vec![p]).unwrap()
}

// The conformal flows need finer steps than the default for their discrete
// contact error to stay under the 1e-9 cocycle tolerance.
const CONFORMAL_STEPS: usize = 1024;

/// One representative of every primitive kind in dimension `n`, flows with
/// short times to keep the suites fast.
pub fn catalog(n: usize) -> Vec<(String, ContactMap)> {
    let mut out = Vec::new();
    if n == 2 {
        out.push(("lift cat".into(), lift(cat())));
        out.push((
            "lift rot".into(),
            lift(IntMatrix::from_rows([[0, -1], [1, 0]])),
        ));
        out.push((
            "lift det -1".into(),
            lift(IntMatrix::from_rows([[1, 1], [0, -1]])),
        ));
        out.push(("shear_a".into(), single(2, Primitive::shear_a())));
        out.push(("shear_b".into(), single(2, Primitive::shear_b())));
        let g = FlatMetric::new(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        out.push((
            "flow metric".into(),
            single(
                2,
                Primitive::flow(Hamiltonian::Metric(g), 0.4, None).unwrap(),
            ),
        ));
        let h = Hamiltonian::conformal(0.3, vec![1, 1], 0.2).unwrap();
        out.push((
            "flow conformal".into(),
            single(2, Primitive::flow(h, 0.3, Some(CONFORMAL_STEPS)).unwrap()),
        ));
    } else {
        out.push((
            "lift 3d".into(),
            lift(IntMatrix::from_rows([[1, 1, 0], [1, 2, 1], [0, 1, 2]])),
        ));
        let h = Hamiltonian::conformal(0.25, vec![1, 0, 1], 0.0).unwrap();
        out.push((
            "flow conformal".into(),
            single(3, Primitive::flow(h, 0.3, Some(CONFORMAL_STEPS)).unwrap()),
        ));
    }
    out.push(("reeb".into(), single(n, Primitive::reeb(0.3).unwrap())));
    let w = (0..n).map(|i| 0.1 + 0.2 * i as f64).collect();
    out.push((
        "flow translation".into(),
        single(
            n,
            Primitive::flow(Hamiltonian::translation(w).unwrap(), 0.5, None).unwrap(),
        ),
    ));
    out.push((
        "flow twist".into(),
        single(
            n,
            Primitive::flow(Hamiltonian::twist(0.2, 0, 1).unwrap(), 0.5, None).unwrap(),
        ),
    ));
    out
}

fn centered(d: f64) -> f64 {
    d - d.round()
}

/// Chart coordinates: `(theta, q)` for `n = 2`; stereographic coordinates from
/// the pole opposite to the hemisphere of `u`, then `q`, for `n = 3`.
pub fn chart_of(x: &CEPoint, south: Option<bool>) -> (Vec<f64>, bool) {
    let u = x.u.u();
    let q = x.q.q();
    if u.len() == 2 {
        let theta = u[1].atan2(u[0]) / std::f64::consts::TAU;
        return (vec![theta, q[0], q[1]], false);
    }
    let south = south.unwrap_or(u[2] > 0.0);
    let den = if south { 1.0 + u[2] } else { 1.0 - u[2] };
    (vec![u[0] / den, u[1] / den, q[0], q[1], q[2]], south)
}

pub fn point_of(c: &[f64], south: bool) -> CEPoint {
    if c.len() == 3 {
        return CEPoint::planar(c[0], c[1], c[2]);
    }
    let r2 = c[0] * c[0] + c[1] * c[1];
    let z = (1.0 - r2) / (1.0 + r2);
    let u = [
        2.0 * c[0] / (1.0 + r2),
        2.0 * c[1] / (1.0 + r2),
        if south { z } else { -z },
    ];
    CEPoint::new(
        Direction::new(&u).unwrap(),
        TorusPoint::new(&c[2..]).unwrap(),
    )
    .unwrap()
}

/// Central finite-difference chart Jacobian; angular and base differences
/// are taken mod 1.
pub fn fd_jacobian(f: &ContactMap, x: &CEPoint, h: f64) -> Vec<Vec<f64>> {
    let (c, south_in) = chart_of(x, None);
    let y = f.apply(x).unwrap();
    let (_, south_out) = chart_of(&y, None);
    let m = c.len();
    let periodic = |i: usize| if m == 3 { true } else { i >= 2 };
    let mut jac = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut plus = c.clone();
        let mut minus = c.clone();
        plus[j] += h;
        minus[j] -= h;
        let yp = chart_of(
            &f.apply(&point_of(&plus, south_in)).unwrap(),
            Some(south_out),
        )
        .0;
        let ym = chart_of(
            &f.apply(&point_of(&minus, south_in)).unwrap(),
            Some(south_out),
        )
        .0;
        for i in 0..m {
            let d = yp[i] - ym[i];
            let d = if periodic(i) { centered(d) } else { d };
            jac[i][j] = d / (2.0 * h);
        }
    }
    jac
}
