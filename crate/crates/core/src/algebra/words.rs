//! Words in free groups, substitution endomorphisms, and conjugacy-class growth.
//!
//! Generators are `a, b, c, ...`; the inverse of a generator is written in
//! upper case, so `aB` is `a b^-1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::GrowthTable;
use crate::error::{LabError, Result};

/// Default early-stop bound on word length.
pub const DEFAULT_LENGTH_CAP: usize = 1_000_000;

/// A word stored as signed generator indices: `+(i+1)` for generator `i`,
/// `-(i+1)` for its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord(Vec<i32>);

impl GroupWord {
    pub fn empty() -> Self {
        GroupWord(Vec::new())
    }

    /// Build from signed letters and freely reduce. Zero is not a letter.
    pub fn from_letters(letters: &[i32]) -> Result<Self> {
        if letters.contains(&0) {
            return Err(LabError::InvalidArgument("0 is not a generator".into()));
        }
        let mut w = GroupWord(letters.to_vec());
        w.reduce();
        Ok(w)
    }

    pub fn generator(i: usize) -> Self {
        GroupWord(vec![i as i32 + 1])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn rank_used(&self) -> usize {
        self.0
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Cancel adjacent `x x^-1` pairs until none remain.
    pub fn reduce(&mut self) {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        self.0 = out;
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut w = GroupWord([self.0.as_slice(), other.0.as_slice()].concat());
        w.reduce();
        w
    }
}

fn letter_char(l: i32) -> char {
    let base = if l > 0 { b'a' } else { b'A' };
    (base + (l.unsigned_abs() - 1) as u8) as char
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = LabError;

    /// Parses `abA`-style words; `1` or the empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(GroupWord::empty());
        }
        let letters = s
            .chars()
            .map(|c| match c {
                'a'..='z' => Ok((c as u8 - b'a') as i32 + 1),
                'A'..='Z' => Ok(-((c as u8 - b'A') as i32 + 1)),
                _ => Err(LabError::InvalidArgument(format!(
                    "invalid letter {c:?} in word {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        GroupWord::from_letters(&letters)
    }
}

/// Freely reduce, then strip matching first/last letters. The result has
/// minimal length in its conjugacy class.
pub fn cyclic_reduce(w: &GroupWord) -> GroupWord {
    let mut w = w.clone();
    w.reduce();
    let letters = &w.0;
    let (mut i, mut j) = (0usize, letters.len());
    while j - i >= 2 && letters[i] == -letters[j - 1] {
        i += 1;
        j -= 1;
    }
    GroupWord(letters[i..j].to_vec())
}

/// Endomorphism of the free group of rank `images.len()` given by the images
/// of the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeAutomorphism {
    images: Vec<GroupWord>,
}

impl FreeAutomorphism {
    pub fn new(images: Vec<GroupWord>) -> Result<Self> {
        let rank = images.len();
        if rank == 0 {
            return Err(LabError::InvalidArgument("free group of rank 0".into()));
        }
        if let Some(w) = images.iter().find(|w| w.rank_used() > rank) {
            return Err(LabError::InvalidArgument(format!(
                "image {w} uses a generator outside rank {rank}"
            )));
        }
        Ok(FreeAutomorphism { images })
    }

    /// Images written as words, e.g. `["ab", "a"]` for `a -> ab, b -> a`.
    pub fn parse(images: &[&str]) -> Result<Self> {
        Self::new(images.iter().map(|s| s.parse()).collect::<Result<_>>()?)
    }

    pub fn identity(rank: usize) -> Self {
        FreeAutomorphism {
            images: (0..rank).map(GroupWord::generator).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[GroupWord] {
        &self.images
    }

    pub fn apply(&self, w: &GroupWord) -> Result<GroupWord> {
        if w.rank_used() > self.rank() {
            return Err(LabError::DimensionMismatch {
                expected: self.rank(),
                found: w.rank_used(),
            });
        }
        let mut out = Vec::new();
        for &l in w.letters() {
            let img = &self.images[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.extend_from_slice(img.letters());
            } else {
                out.extend(img.letters().iter().rev().map(|x| -x));
            }
        }
        let mut out = GroupWord(out);
        out.reduce();
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FreeAutomorphism) -> Result<FreeAutomorphism> {
        let images = other
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<_>>()?;
        FreeAutomorphism::new(images)
    }

    /// Whether `candidate` is a two-sided inverse.
    pub fn is_inverse(&self, candidate: &FreeAutomorphism) -> Result<bool> {
        let id = FreeAutomorphism::identity(self.rank());
        Ok(self.compose(candidate)? == id && candidate.compose(self)? == id)
    }
}

/// Cyclic lengths of `sigma^n(w)` for `n = 0, 1, ...` up to `steps`, stopping
/// after the first length above `cap`.
pub fn free_growth_table(
    sigma: &FreeAutomorphism,
    w: &GroupWord,
    steps: usize,
    cap: usize,
) -> Result<GrowthTable> {
    let mut cur = cyclic_reduce(w);
    if cur.is_empty() {
        return Err(LabError::TrivialClass);
    }
    let mut lengths = vec![BigInt::from(cur.len())];
    for _ in 0..steps {
        if cur.len() > cap {
            break;
        }
        cur = cyclic_reduce(&sigma.apply(&cur)?);
        if cur.is_empty() {
            // only an endomorphism with nontrivial kernel gets here
            return Err(LabError::TrivialClass);
        }
        lengths.push(BigInt::from(cur.len()));
    }
    Ok(GrowthTable::from_lengths(lengths))
}

/// Finite-`N` growth rate of the conjugacy class of `w` under `sigma`.
pub fn free_growth(
    sigma: &FreeAutomorphism,
    w: &GroupWord,
    steps: usize,
    cap: usize,
) -> Result<f64> {
    if steps < 5 {
        return Err(LabError::InvalidArgument(format!(
            "growth horizon must be >= 5, got {steps}"
        )));
    }
    Ok(free_growth_table(sigma, w, steps, cap)?.slope.max(0.0))
}
