//! Exact and floating scalars used by the sequence calculus.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Exact rationals for the identities that must hold without rounding.
pub type Q = Ratio<i128>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(k: i128) -> Self;
    /// Equality up to `rel` relative error; exact types ignore `rel`.
    fn close_to(&self, other: &Self, rel: f64) -> bool;
}

impl Scalar for f64 {
    fn from_int(k: i128) -> Self {
        k as f64
    }
    fn close_to(&self, other: &Self, rel: f64) -> bool {
        (self - other).abs() <= rel * 1f64.max(self.abs()).max(other.abs())
    }
}

impl Scalar for C64 {
    fn from_int(k: i128) -> Self {
        C64::new(k as f64, 0.0)
    }
    fn close_to(&self, other: &Self, rel: f64) -> bool {
        (self - other).norm() <= rel * 1f64.max(self.norm()).max(other.norm())
    }
}

impl Scalar for Q {
    fn from_int(k: i128) -> Self {
        Q::from_integer(k)
    }
    fn close_to(&self, other: &Self, _rel: f64) -> bool {
        self == other
    }
}

/// Exact binomial coefficient. Returns 0 for `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k_eff = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k_eff {
        // acc * (n - i) is divisible by (i + 1) at every step.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        let num = num / d;
        acc = a.checked_mul(num).ok_or(Error::Overflow { n, k })?;
    }
    Ok(acc)
}

/// Binomial coefficient as f64, erroring on u128 overflow.
pub fn binomial_f64(n: u64, k: u64) -> Result<f64> {
    binomial(n, k).map(|b| b as f64)
}

/// Dimension of the i-th shell of ℕ^N: binom(N+i-1, N-1).
pub fn shell_size(dim: usize, i: usize) -> Result<u128> {
    if dim == 0 {
        return Ok(if i == 0 { 1 } else { 0 });
    }
    binomial((dim + i - 1) as u64, (dim - 1) as u64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Converts a rational into a complex double.
pub fn q_to_c64(q: &Q) -> C64 {
    c64(*q.numer() as f64 / *q.denom() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2).unwrap(), 6);
        assert_eq!(binomial(9, 0).unwrap(), 1);
        assert_eq!(binomial(10, 5).unwrap(), 252);
        assert_eq!(binomial(3, 5).unwrap(), 0);
    }

    #[test]
    fn binomial_matches_pascal_rule() {
        for n in 1..60u64 {
            for k in 1..n {
                let lhs = binomial(n, k).unwrap();
                let rhs = binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn binomial_reports_overflow() {
        assert!(binomial(130, 65).is_ok());
        assert!(matches!(binomial(400, 200), Err(Error::Overflow { .. })));
    }

    #[test]
    fn shell_sizes() {
        assert_eq!(shell_size(2, 3).unwrap(), 4);
        assert_eq!(shell_size(1, 7).unwrap(), 1);
        assert_eq!(shell_size(3, 2).unwrap(), 6);
    }
}
