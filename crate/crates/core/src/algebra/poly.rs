//! Exact characteristic polynomials, cyclotomic factorization and numerical
//! roots of the non-cyclotomic remainder.

use super::matrix::IntMatrix;
use crate::error::{LabError, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Integer polynomial, coefficients from the constant term upwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(pub Vec<i128>);

impl IntPoly {
    fn trimmed(mut c: Vec<i128>) -> Self {
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        IntPoly(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c as f64)
    }

    /// Exact division by a monic divisor; `None` if the remainder is nonzero.
    pub fn div_exact_monic(&self, d: &IntPoly) -> Option<IntPoly> {
        debug_assert_eq!(*d.0.last().unwrap(), 1);
        let (dn, nn) = (d.degree(), self.degree());
        if nn < dn {
            return None;
        }
        let mut rem = self.0.clone();
        let mut quot = vec![0i128; nn - dn + 1];
        for k in (0..=nn - dn).rev() {
            let c = rem[k + dn];
            quot[k] = c;
            if c != 0 {
                for (j, &dc) in d.0.iter().enumerate() {
                    rem[k + j] = rem[k + j].checked_sub(c.checked_mul(dc)?)?;
                }
            }
        }
        if rem.iter().all(|&x| x == 0) {
            Some(Self::trimmed(quot))
        } else {
            None
        }
    }

    fn mul(&self, rhs: &IntPoly) -> IntPoly {
        let mut c = vec![0i128; self.0.len() + rhs.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::trimmed(c)
    }
}

/// Characteristic polynomial `det(tI - M)` by Faddeev-LeVerrier in exact
/// integer arithmetic.
pub fn char_poly(m: &IntMatrix) -> Result<IntPoly> {
    let n = m.size();
    let a: Vec<i128> = m.entries().iter().map(|&x| x as i128).collect();
    let ovf = || LabError::Overflow("characteristic polynomial");
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    // mk = M_k, starting from M_0 = 0
    let mut mk = vec![0i128; n * n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![0i128; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for l in 0..n {
                    s = s
                        .checked_add(a[i * n + l].checked_mul(mk[l * n + j]).ok_or_else(ovf)?)
                        .ok_or_else(ovf)?;
                }
                next[i * n + j] = s;
            }
            next[i * n + i] = next[i * n + i]
                .checked_add(coeffs[n - k + 1])
                .ok_or_else(ovf)?;
        }
        mk = next;
        // c_{n-k} = -tr(A M_k) / k
        let mut tr: i128 = 0;
        for i in 0..n {
            for l in 0..n {
                tr = tr
                    .checked_add(a[i * n + l].checked_mul(mk[l * n + i]).ok_or_else(ovf)?)
                    .ok_or_else(ovf)?;
            }
        }
        debug_assert_eq!(tr % k as i128, 0);
        coeffs[n - k] = -tr / k as i128;
    }
    Ok(IntPoly(coeffs))
}

/// Cyclotomic polynomial `Phi_m`.
pub fn cyclotomic(m: u32) -> IntPoly {
    // x^m - 1 divided by Phi_d for every proper divisor d
    let mut num = vec![0i128; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    let mut p = IntPoly(num);
    for d in (1..m).filter(|d| m.is_multiple_of(*d)) {
        p = p
            .div_exact_monic(&cyclotomic(d))
            .expect("x^m - 1 factors over Phi_d");
    }
    p
}

fn euler_phi(m: u32) -> u32 {
    (1..=m).filter(|&k| gcd(k, m) == 1).count() as u32
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Result of peeling cyclotomic factors off a monic integer polynomial.
#[derive(Debug, Clone)]
pub struct CyclotomicSplit {
    /// Orders `m` of the cyclotomic factors `Phi_m`, with multiplicity.
    pub orders: Vec<u32>,
    /// What remains after all cyclotomic factors are removed.
    pub remainder: IntPoly,
}

pub fn split_cyclotomic(p: &IntPoly) -> CyclotomicSplit {
    let deg = p.degree() as u32;
    let mut orders = Vec::new();
    let mut rem = p.clone();
    // phi(m) <= deg implies m <= 2 deg^2 for the degrees we meet (<= 6)
    for m in (1..=(2 * deg * deg).max(2)).filter(|&m| euler_phi(m) <= deg) {
        let phi = cyclotomic(m);
        while rem.degree() >= phi.degree() {
            match rem.div_exact_monic(&phi) {
                Some(q) => {
                    orders.push(m);
                    rem = q;
                }
                None => break,
            }
        }
    }
    CyclotomicSplit {
        orders,
        remainder: rem,
    }
}

type QPoly = Vec<BigRational>;

fn to_q(p: &IntPoly) -> QPoly {
    p.0.iter()
        .map(|&c| BigRational::from_integer(BigInt::from(c)))
        .collect()
}

fn q_trim(mut p: QPoly) -> QPoly {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn q_is_zero(p: &QPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn q_rem(a: &QPoly, b: &QPoly) -> QPoly {
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    let mut r = a.clone();
    while !q_is_zero(&r) && r.len() > db {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (j, bc) in b.iter().enumerate() {
            r[shift + j] = &r[shift + j] - &c * bc;
        }
        r.pop();
        if r.is_empty() {
            r.push(BigRational::zero());
        }
        r = q_trim(r);
    }
    r
}

fn q_gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !q_is_zero(&y) {
        let r = q_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

/// Monic integer polynomial from a rational one (Gauss: monic factors of a
/// monic integer polynomial have integer coefficients).
fn q_to_monic_int(p: &QPoly) -> IntPoly {
    let lead = p.last().unwrap().clone();
    IntPoly(
        p.iter()
            .map(|c| {
                let v = c / &lead;
                debug_assert!(v.is_integer());
                v.to_integer().to_i128().expect("small coefficients")
            })
            .collect(),
    )
}

fn derivative(p: &IntPoly) -> IntPoly {
    if p.degree() == 0 {
        return IntPoly(vec![0]);
    }
    IntPoly(
        p.0.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as i128)
            .collect(),
    )
}

/// Square-free decomposition: `p = prod s_i` where each `s_i` is square-free
/// and `s_{i+1}` divides `s_i`. Every root appears once per factor it divides.
fn square_free_layers(p: &IntPoly) -> Vec<IntPoly> {
    let mut layers = Vec::new();
    let mut rest = p.clone();
    while rest.degree() > 0 {
        let g = q_to_monic_int(&q_gcd(&to_q(&rest), &to_q(&derivative(&rest))));
        let s = rest.div_exact_monic(&g).expect("gcd divides");
        rest = g;
        layers.push(s);
    }
    layers
}

const ROOT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 2000;

/// All complex roots of a square-free monic polynomial (Durand-Kerner
/// simultaneous iteration, then a Newton polish).
pub fn roots_square_free(p: &IntPoly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(vec![]);
    }
    let coeffs: Vec<f64> = p.0.iter().map(|&c| c as f64).collect();
    // Cauchy bound
    let bound = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32) * (bound / 2.0).max(1.0))
        .collect();
    let eval = |x: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * x + c)
    };
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::one();
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta < 1e-15 {
            converged = true;
            break;
        }
    }
    let dcoeffs: Vec<f64> = derivative(p).0.iter().map(|&c| c as f64).collect();
    let deval = |x: Complex64| {
        dcoeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * x + c)
    };
    for r in z.iter_mut() {
        for _ in 0..3 {
            let d = deval(*r);
            if d.norm() == 0.0 {
                break;
            }
            *r -= eval(*r) / d;
        }
    }
    let scale = coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
    let residual_ok = z
        .iter()
        .all(|&r| eval(r).norm() <= ROOT_TOL * scale * r.norm().max(1.0).powi(n as i32));
    if !converged && !residual_ok {
        return Err(LabError::SolverNonConvergence(MAX_ITER));
    }
    Ok(z)
}

/// Moduli of all eigenvalues of `m` with multiplicity, sorted ascending.
/// Roots of unity are detected exactly and reported as exactly 1.
pub fn eigen_moduli(m: &IntMatrix) -> Result<Vec<f64>> {
    let cp = char_poly(m)?;
    let split = split_cyclotomic(&cp);
    let mut moduli: Vec<f64> = split
        .orders
        .iter()
        .flat_map(|&o| std::iter::repeat_n(1.0, euler_phi(o) as usize))
        .collect();
    for layer in square_free_layers(&split.remainder) {
        for r in roots_square_free(&layer)? {
            moduli.push(r.norm());
        }
    }
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(moduli)
}

/// Product of `Phi_m` over the given orders; used by tests and diagnostics.
pub fn cyclotomic_product(orders: &[u32]) -> IntPoly {
    orders
        .iter()
        .fold(IntPoly(vec![1]), |acc, &m| acc.mul(&cyclotomic(m)))
}
