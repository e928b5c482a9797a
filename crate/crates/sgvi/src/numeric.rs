//! Scalar abstraction shared by floating-point and exact rational arithmetic.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest denominator accepted when recovering a fraction from a float.
pub const MAX_DENOMINATOR: i64 = 1_000_000;
/// Accepted distance between a float and its recovered fraction.
pub const FRACTION_TOLERANCE: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Pivot magnitude used for partial pivoting.
    fn magnitude(&self) -> f64;
    /// Pivots at or below this magnitude make a system singular.
    fn pivot_tolerance() -> f64;
    fn to_f64(&self) -> f64;
    fn from_f64(x: f64) -> Result<Self>;

    /// Solves `(I - P) x = b` for a substochastic `P` with spectral radius
    /// below one, given as the matrix `I - P`.
    fn solve_transient(a: Vec<Vec<Self>>, b: Vec<Self>) -> Result<Vec<Self>> {
        solve_linear(a, b)
    }

    /// Stationary distribution of an irreducible stochastic matrix.
    fn stationary(p: &[Vec<Self>]) -> Result<Vec<Self>> {
        solve_linear(stationary_system(p), unit_last(p.len()))
    }
}

/// The balance equations `pi (I - P) = 0` with the last one replaced by
/// `sum pi = 1`.
fn stationary_system<T: Scalar>(p: &[Vec<T>]) -> Vec<Vec<T>> {
    let m = p.len();
    (0..m)
        .map(|k| {
            if k + 1 == m {
                vec![T::one(); m]
            } else {
                (0..m)
                    .map(|j| {
                        let diagonal = if j == k { T::one() } else { T::zero() };
                        diagonal - p[j][k].clone()
                    })
                    .collect()
            }
        })
        .collect()
}

fn unit_last<T: Scalar>(m: usize) -> Vec<T> {
    (0..m).map(|k| if k + 1 == m { T::one() } else { T::zero() }).collect()
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn pivot_tolerance() -> f64 {
        1e-13
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }

    /// Falls back to Gauss-Seidel sweeps when elimination hits a tiny pivot.
    fn solve_transient(a: Vec<Vec<Self>>, b: Vec<Self>) -> Result<Vec<Self>> {
        match solve_linear(a.clone(), b.clone()) {
            Err(Error::Singular) => gauss_seidel(&a, &b),
            other => other,
        }
    }

    /// Falls back to power iteration on the lazy chain `(I + P) / 2`.
    fn stationary(p: &[Vec<Self>]) -> Result<Vec<Self>> {
        match solve_linear(stationary_system(p), unit_last(p.len())) {
            Err(Error::Singular) => power_iteration(p),
            other => other,
        }
    }
}

fn power_iteration(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = p.len();
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..10_000_000 {
        let mut next = vec![0.0; m];
        for j in 0..m {
            next[j] += 0.5 * pi[j];
            for k in 0..m {
                next[k] += 0.5 * pi[j] * p[j][k];
            }
        }
        let change = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
        pi = next;
        if change <= 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::Singular)
}

fn gauss_seidel(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for _ in 0..10_000_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            if a[i][i] <= 0.0 {
                return Err(Error::Singular);
            }
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j] * x[j]).sum();
            let next = (b[i] - off) / a[i][i];
            change = change.max((next - x[i]).abs());
            x[i] = next;
        }
        if change <= 1e-15 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs())) {
            return Ok(x);
        }
    }
    Err(Error::Singular)
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::MAX).max(f64::MIN_POSITIVE)
        }
    }
    fn pivot_tolerance() -> f64 {
        0.0
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Result<Self> {
        rational_from_f64(x).ok_or(Error::NotRational(x))
    }
}

/// Recovers a fraction with denominator at most [`MAX_DENOMINATOR`] within
/// [`FRACTION_TOLERANCE`] of `x`, using continued fractions.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = target;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > MAX_DENOMINATOR as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - target).abs() <= FRACTION_TOLERANCE {
            let r = BigRational::new(BigInt::from(h1), BigInt::from(k1));
            return Some(if negative { -r } else { r });
        }
        let frac = rest - rest.floor();
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Parses `"a/b"` or a decimal literal into a rational.
pub fn parse_fraction(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            (!den.is_zero()).then(|| BigRational::new(num, den))
        }
        None => text.parse::<f64>().ok().and_then(rational_from_f64),
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude())).ok_or(Error::Singular)?;
        if a[pivot][col].magnitude() <= T::pivot_tolerance() {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].magnitude() == 0.0 {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
            let delta = factor * b[col].clone();
            b[row] = b[row].clone() - delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_fractions() {
        let third = rational_from_f64(1.0 / 3.0).unwrap();
        assert_eq!(third, BigRational::new(1.into(), 3.into()));
        assert_eq!(rational_from_f64(0.9).unwrap(), BigRational::new(9.into(), 10.into()));
        assert_eq!(rational_from_f64(6.0).unwrap(), BigRational::from_integer(6.into()));
        assert_eq!(rational_from_f64(-2.5).unwrap(), BigRational::new((-5).into(), 2.into()));
        assert!(rational_from_f64(std::f64::consts::PI).is_none());
    }

    #[test]
    fn parses_fraction_strings() {
        assert_eq!(parse_fraction("2/6").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_fraction("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert!(parse_fraction("1/0").is_none());
    }

    #[test]
    fn solves_small_systems_exactly() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let a = vec![vec![r(1, 1), r(-1, 3)], vec![r(-1, 1), r(1, 1)]];
        let b = vec![r(1, 3), r(0, 1)];
        let x = solve_linear(a, b).unwrap();
        assert_eq!(x, vec![r(1, 2), r(1, 2)]);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve_linear(a, vec![1.0, 2.0]), Err(Error::Singular));
    }
}
