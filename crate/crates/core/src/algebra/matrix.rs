use crate::error::{LabError, Result};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_DIM: usize = 6;

/// Square integer matrix, row-major, `n <= 6`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    n: usize,
    a: Vec<i64>,
}

impl IntMatrix {
    pub fn new(n: usize, row_major: Vec<i64>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(LabError::InvalidArgument(format!(
                "matrix size must be in 1..={MAX_DIM}, got {n}"
            )));
        }
        if row_major.len() != n * n {
            return Err(LabError::InvalidArgument(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                row_major.len()
            )));
        }
        Ok(IntMatrix { n, a: row_major })
    }

    /// Square matrix from a row-major entry list of length `n^2`.
    pub fn from_row_major(entries: &[i64]) -> Result<Self> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        Self::new(n, entries.to_vec())
    }

    pub fn from_rows<const N: usize>(rows: [[i64; N]; N]) -> Self {
        IntMatrix {
            n: N,
            a: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        IntMatrix { n, a }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.n + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.a
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut a = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.a[i * n + j];
            }
        }
        IntMatrix { n, a }
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.n != rhs.n {
            return Err(LabError::DimensionMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        let n = self.n;
        let mut a = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for k in 0..n {
                    s += self.a[i * n + k] as i128 * rhs.a[k * n + j] as i128;
                }
                a[i * n + j] =
                    i64::try_from(s).map_err(|_| LabError::Overflow("matrix product"))?;
            }
        }
        Ok(IntMatrix { n, a })
    }

    pub fn checked_pow(&self, k: u32) -> Result<IntMatrix> {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let s: i128 = (0..n)
                    .map(|k| self.a[i * n + k] as i128 * v[k] as i128)
                    .sum();
                i64::try_from(s).map_err(|_| LabError::Overflow("matrix-vector product"))
            })
            .collect()
    }

    /// Exact determinant (fraction-free Bareiss elimination).
    pub fn det(&self) -> i128 {
        let n = self.n;
        let mut m: Vec<BigInt> = self.a.iter().map(|&x| BigInt::from(x)).collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n.saturating_sub(1) {
            if m[k * n + k].is_zero() {
                match (k + 1..n).find(|&r| !m[r * n + k].is_zero()) {
                    Some(r) => {
                        for c in 0..n {
                            m.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = v / &prev;
                }
            }
            prev = m[k * n + k].clone();
        }
        let d = &m[n * n - 1] * BigInt::from(sign);
        d.to_i128()
            .expect("determinant of a <= 6x6 i64 matrix fits in i128")
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    fn minor(&self, row: usize, col: usize) -> IntMatrix {
        let n = self.n;
        let mut a = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                a.push(self.a[i * n + j]);
            }
        }
        IntMatrix { n: n - 1, a }
    }

    /// Exact inverse of a matrix with determinant `+-1`.
    pub fn inverse(&self) -> Result<IntMatrix> {
        let d = self.det();
        if d.abs() != 1 {
            return Err(LabError::NotUnimodular(d));
        }
        let n = self.n;
        if n == 1 {
            return Ok(IntMatrix {
                n,
                a: vec![d as i64],
            });
        }
        let mut a = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let sgn = if (i + j) % 2 == 0 { 1 } else { -1 };
                let cof = sgn * self.minor(j, i).det() * d;
                a[i * n + j] = i64::try_from(cof).map_err(|_| LabError::Overflow("inverse"))?;
            }
        }
        Ok(IntMatrix { n, a })
    }

    /// Inverse transpose, the action on directions of a canonical lift.
    pub fn inverse_transpose(&self) -> Result<IntMatrix> {
        Ok(self.inverse()?.transpose())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    pub fn to_big(&self) -> BigMatrix {
        BigMatrix {
            n: self.n,
            a: self.a.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    /// Block-diagonal `[s] (+) self`.
    pub fn with_leading(&self, s: i64) -> IntMatrix {
        let n = self.n + 1;
        let mut a = vec![0i64; n * n];
        a[0] = s;
        for i in 0..self.n {
            for j in 0..self.n {
                a[(i + 1) * n + j + 1] = self.get(i, j);
            }
        }
        IntMatrix { n, a }
    }

    /// `self^k` as a float matrix, computed exactly and falling back to big
    /// integers on overflow.
    pub fn pow_f64(&self, k: u32) -> DMatrix<f64> {
        match self.checked_pow(k) {
            Ok(m) => m.to_f64(),
            Err(_) => self.to_big().pow(k).to_f64(),
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", &self.a[i * self.n..(i + 1) * self.n])?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Big-integer square matrix for long iterations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigMatrix {
    n: usize,
    a: Vec<BigInt>,
}

impl BigMatrix {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = BigInt::one();
        }
        BigMatrix { n, a }
    }

    pub fn mul(&self, rhs: &BigMatrix) -> BigMatrix {
        let n = self.n;
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = &self.a[i * n + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] += x * &rhs.a[k * n + j];
                }
            }
        }
        BigMatrix { n, a }
    }

    pub fn pow(&self, k: u32) -> BigMatrix {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|k| &self.a[i * n + k] * &v[k]).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.a[i * self.n + j].to_f64().unwrap_or(f64::INFINITY)
        })
    }
}

/// Natural log of a positive big integer, accurate to double precision.
pub fn ln_big(x: &BigInt) -> f64 {
    let x = x.abs();
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = &x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
