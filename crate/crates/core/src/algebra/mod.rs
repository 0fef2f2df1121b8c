//! Spectral invariants of integer matrices and conjugacy-class growth.

pub mod matrix;
pub mod poly;
pub mod words;

pub use matrix::{BigMatrix, IntMatrix};
pub use poly::eigen_moduli;
pub use words::{
    cyclic_reduce, free_growth, free_growth_table, FreeAutomorphism, GroupWord, DEFAULT_LENGTH_CAP,
};

use crate::error::{LabError, Result};
use crate::stats::tail_fit;
use matrix::ln_big;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Threshold on `s(M)` above which `M` counts as hyperbolic.
pub const HYPERBOLIC_EPS: f64 = 1e-8;

/// `s(M) = max |log |c||` over the complex eigenvalues `c` of `M`.
pub fn s_value(m: &IntMatrix) -> Result<f64> {
    Ok(eigen_moduli(m)?
        .iter()
        .map(|c| c.ln().abs())
        .fold(0.0, f64::max))
}

pub fn is_hyperbolic(m: &IntMatrix) -> Result<bool> {
    Ok(s_value(m)? > HYPERBOLIC_EPS)
}

/// Whether `M^m = id` for some `m`, and the least such `m` when it is.
///
/// The characteristic polynomial must split into cyclotomic factors; the
/// candidate order is then the lcm of their orders, and `M^order = id` is
/// checked exactly, which rejects non-semisimple (unipotent) parts.
pub fn is_periodic(m: &IntMatrix) -> Result<(bool, Option<u32>)> {
    let cp = poly::char_poly(m)?;
    let split = poly::split_cyclotomic(&cp);
    if split.remainder.degree() > 0 {
        return Ok((false, None));
    }
    let candidate = split.orders.iter().fold(1u32, |acc, &o| poly::lcm(acc, o));
    let power_is_id = match m.checked_pow(candidate) {
        Ok(p) => p.is_identity(),
        // a periodic matrix has bounded powers, so overflow means "not periodic"
        Err(_) => false,
    };
    if !power_is_id {
        return Ok((false, None));
    }
    // the exact order divides the candidate
    let order = (1..=candidate)
        .filter(|d| candidate % d == 0)
        .find(|&d| m.checked_pow(d).map(|p| p.is_identity()).unwrap_or(false))
        .unwrap_or(candidate);
    Ok((true, Some(order)))
}

/// Decomposition of a 3x3 cohomology automorphism of `T^3` in the basis
/// `([dtheta], [dq1], [dq2])` that preserves the fiber line `V = span [dtheta]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ABlock {
    /// Action on `[dq1], [dq2]` modulo `V`: columns are images.
    pub a: IntMatrix,
    /// `[dtheta]` coefficient of the image of `[dq1]`.
    pub l: i64,
    /// `[dtheta]` coefficient of the image of `[dq2]`.
    pub m: i64,
    /// `I[dtheta] = sign * [dtheta]`; `+1` for coorientation-preserving maps.
    pub fiber_sign: i64,
}

pub fn a_block(i: &IntMatrix) -> Result<ABlock> {
    if i.size() != 3 {
        return Err(LabError::DimensionMismatch {
            expected: 3,
            found: i.size(),
        });
    }
    let fiber = i.get(0, 0);
    if i.get(1, 0) != 0 || i.get(2, 0) != 0 || fiber.abs() != 1 {
        return Err(LabError::NotContactRepresentable);
    }
    Ok(ABlock {
        a: IntMatrix::from_rows([[i.get(1, 1), i.get(1, 2)], [i.get(2, 1), i.get(2, 2)]]),
        l: i.get(0, 1),
        m: i.get(0, 2),
        fiber_sign: fiber,
    })
}

/// Word-length table of a class under iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    pub lengths: Vec<BigInt>,
    pub log_lengths: Vec<f64>,
    /// Least-squares slope of `log length` against `n` over the last half.
    pub slope: f64,
}

impl GrowthTable {
    pub(crate) fn from_lengths(lengths: Vec<BigInt>) -> Self {
        let log_lengths: Vec<f64> = lengths.iter().map(ln_big).collect();
        let slope = tail_fit(&log_lengths, 0).slope;
        GrowthTable {
            lengths,
            log_lengths,
            slope,
        }
    }
}

enum Iterate {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

/// `||M^n gamma||_1` for `n = 0..=steps`: machine integers until overflow,
/// then big integers.
pub fn abelian_growth_table(m: &IntMatrix, gamma: &[i64], steps: usize) -> Result<GrowthTable> {
    if gamma.len() != m.size() {
        return Err(LabError::DimensionMismatch {
            expected: m.size(),
            found: gamma.len(),
        });
    }
    if gamma.iter().all(|&x| x == 0) {
        return Err(LabError::TrivialClass);
    }
    let l1_small = |v: &[i64]| -> Option<BigInt> {
        v.iter()
            .try_fold(0i64, |acc, &x| acc.checked_add(x.checked_abs()?))
            .map(BigInt::from)
    };
    let l1_big = |v: &[BigInt]| -> BigInt { v.iter().map(|x| x.abs()).sum() };

    let widen = |v: &[i64]| -> Vec<BigInt> { v.iter().map(|&x| BigInt::from(x)).collect() };
    let big_m = m.to_big();
    let mut lengths = Vec::with_capacity(steps + 1);
    let mut cur = Iterate::Small(gamma.to_vec());
    for n in 0..=steps {
        if let Iterate::Small(v) = &cur {
            if l1_small(v).is_none() {
                cur = Iterate::Big(widen(v));
            }
        }
        lengths.push(match &cur {
            Iterate::Small(v) => l1_small(v).expect("checked above"),
            Iterate::Big(v) => l1_big(v),
        });
        if n == steps {
            break;
        }
        cur = match cur {
            Iterate::Small(v) => match m.apply(&v) {
                Ok(next) => Iterate::Small(next),
                Err(_) => Iterate::Big(big_m.apply(&widen(&v))),
            },
            Iterate::Big(v) => Iterate::Big(big_m.apply(&v)),
        };
    }
    if lengths.iter().any(|l| l.is_zero()) {
        // only possible for singular matrices
        return Err(LabError::TrivialClass);
    }
    Ok(GrowthTable::from_lengths(lengths))
}

/// Finite-`N` estimate of the conjugacy growth rate of `gamma -> M gamma` on
/// `Z^n` with the L1 word length: the maximal tail slope over the samples.
pub fn abelian_bar_s(m: &IntMatrix, samples: &[Vec<i64>], steps: usize) -> Result<f64> {
    if steps < 10 {
        return Err(LabError::InvalidArgument(format!(
            "growth horizon must be >= 10, got {steps}"
        )));
    }
    if samples.is_empty() {
        return Err(LabError::InvalidArgument("no sample classes".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for g in samples {
        best = best.max(abelian_growth_table(m, g, steps)?.slope);
    }
    Ok(best.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_sq_ln() -> f64 {
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    }

    #[test]
    fn s_value_examples() {
        assert_eq!(s_value(&IntMatrix::identity(2)).unwrap(), 0.0);
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        assert!((s_value(&cat).unwrap() - golden_sq_ln()).abs() < 1e-12);
        assert!((s_value(&cat).unwrap() - 0.96242).abs() < 1e-5);
        let shear = IntMatrix::from_rows([[1, 1], [0, 1]]);
        assert_eq!(s_value(&shear).unwrap(), 0.0);
        assert!(!is_hyperbolic(&shear).unwrap());
        assert!(is_hyperbolic(&cat).unwrap());
    }

    #[test]
    fn periodicity_examples() {
        assert_eq!(
            is_periodic(&IntMatrix::identity(3)).unwrap(),
            (true, Some(1))
        );
        let rot = IntMatrix::from_rows([[0, -1], [1, 0]]);
        assert_eq!(is_periodic(&rot).unwrap(), (true, Some(4)));
        let shear = IntMatrix::from_rows([[1, 1], [0, 1]]);
        assert_eq!(is_periodic(&shear).unwrap(), (false, None));
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        assert_eq!(is_periodic(&cat).unwrap(), (false, None));
        // order 6: t^2 - t + 1
        let six = IntMatrix::from_rows([[1, -1], [1, 0]]);
        assert_eq!(is_periodic(&six).unwrap(), (true, Some(6)));
        // order 3 permutation and -id
        let perm = IntMatrix::from_rows([[0, 1, 0], [0, 0, 1], [1, 0, 0]]);
        assert_eq!(is_periodic(&perm).unwrap(), (true, Some(3)));
        let neg = IntMatrix::from_rows([[-1, 0], [0, -1]]);
        assert_eq!(is_periodic(&neg).unwrap(), (true, Some(2)));
    }

    #[test]
    fn a_block_examples() {
        let id = a_block(&IntMatrix::identity(3)).unwrap();
        assert!(id.a.is_identity());
        assert_eq!((id.l, id.m), (0, 0));
        let shear = IntMatrix::from_rows([[1, -1, 0], [0, 1, 0], [0, 0, 1]]);
        let b = a_block(&shear).unwrap();
        assert!(b.a.is_identity());
        assert_eq!((b.l, b.m), (-1, 0));
        let cat = IntMatrix::from_rows([[1, 0, 0], [0, 2, 1], [0, 1, 1]]);
        assert_eq!(
            a_block(&cat).unwrap().a,
            IntMatrix::from_rows([[2, 1], [1, 1]])
        );
        let bad = IntMatrix::from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]]);
        assert_eq!(
            a_block(&bad).unwrap_err(),
            LabError::NotContactRepresentable
        );
    }

    #[test]
    fn abelian_growth_examples() {
        let samples = vec![vec![1, 0], vec![0, 1], vec![3, -2]];
        assert_eq!(
            abelian_bar_s(&IntMatrix::identity(2), &samples, 40).unwrap(),
            0.0
        );
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        let s = abelian_bar_s(&cat, &[vec![1, 0]], 40).unwrap();
        assert!((s - golden_sq_ln()).abs() < 1e-3, "{s}");
        // ||M^n (0,1)||_1 = n + 1 for the unipotent shear
        let shear = IntMatrix::from_rows([[1, 1], [0, 1]]);
        let t = abelian_growth_table(&shear, &[0, 1], 40).unwrap();
        for (n, len) in t.lengths.iter().enumerate() {
            assert_eq!(*len, BigInt::from(n + 1));
        }
        assert!(t.slope < 0.05);
        assert!(abelian_bar_s(&cat, &[vec![1, 0]], 5).is_err());
        assert_eq!(
            abelian_growth_table(&cat, &[0, 0], 10).unwrap_err(),
            LabError::TrivialClass
        );
    }

    #[test]
    fn abelian_growth_switches_to_big_integers() {
        let cat = IntMatrix::from_rows([[2, 1], [1, 1]]);
        let t = abelian_growth_table(&cat, &[1, 0], 120).unwrap();
        // M^n (1,0) = (F_{2n+1}, F_{2n}), so the L1 length is F_{2n+2}
        let mut fib = vec![BigInt::from(0), BigInt::from(1)];
        while fib.len() < 2 * 120 + 3 {
            let k = fib.len();
            let next = &fib[k - 1] + &fib[k - 2];
            fib.push(next);
        }
        for (n, len) in t.lengths.iter().enumerate() {
            assert_eq!(*len, fib[2 * n + 2]);
        }
        assert!((t.slope - golden_sq_ln()).abs() < 1e-9);
    }
}
