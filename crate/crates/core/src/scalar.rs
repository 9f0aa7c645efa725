//! Numeric backends shared by the float and exact-rational computation paths.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A field the transfer contractions can run in.
///
/// Floats carry a separate running log-scale so long products stay in range;
/// exact rationals never rescale, so their log-scale is always zero.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self;

    /// `e^value`, using the exact weight when the backend needs one.
    fn exp_weight(value: f64, exact: Option<&BigRational>) -> Option<Self>;

    fn ln(&self) -> f64;

    /// Divides `v` by a positive factor and returns the factor's log.
    fn rescale(v: &mut [Self]) -> f64;

    /// Folds `log_scale` back into the mantissa.
    fn collapse(mantissa: Self, log_scale: f64) -> Self;

    /// Multiplies `(mantissa, log_scale)` by `base^n`.
    fn mul_power(mantissa: Self, log_scale: f64, base: &Self, n: usize) -> (Self, f64);
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }

    fn exp_weight(value: f64, _exact: Option<&BigRational>) -> Option<Self> {
        Some(value.exp())
    }

    fn ln(&self) -> f64 {
        f64::ln(*self)
    }

    fn rescale(v: &mut [Self]) -> f64 {
        let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if max == 0.0 || !max.is_finite() {
            return 0.0;
        }
        for x in v.iter_mut() {
            *x /= max;
        }
        max.ln()
    }

    fn collapse(mantissa: Self, log_scale: f64) -> Self {
        if mantissa == 0.0 {
            0.0
        } else {
            mantissa * log_scale.exp()
        }
    }

    fn mul_power(mantissa: Self, log_scale: f64, base: &Self, n: usize) -> (Self, f64) {
        (mantissa, log_scale + n as f64 * base.ln())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| self.ln().exp())
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn exp_weight(_value: f64, exact: Option<&BigRational>) -> Option<Self> {
        exact.cloned()
    }

    fn ln(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }

    fn rescale(_v: &mut [Self]) -> f64 {
        0.0
    }

    fn collapse(mantissa: Self, _log_scale: f64) -> Self {
        mantissa
    }

    fn mul_power(mantissa: Self, log_scale: f64, base: &Self, n: usize) -> (Self, f64) {
        (mantissa * num_traits::pow(base.clone(), n), log_scale)
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    let x = x.abs();
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (&x >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Clone + Zero> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }
}

impl<S: Clone> SquareMatrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(SquareMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.n {
            for i in 0..self.n {
                data.push(self.get(i, j).clone());
            }
        }
        SquareMatrix { n: self.n, data }
    }

    pub fn map<T, F: Fn(&S) -> T>(&self, f: F) -> SquareMatrix<T> {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> SquareMatrix<S> {
    /// `M v`.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `v^T M`.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.n];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o = o.clone() + vi.clone() * m.clone();
            }
        }
        out
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Renders a rational exactly: terminating decimals as decimals, everything else as `p/q`.
pub fn render_rational(x: &BigRational) -> String {
    use num_integer::Integer;

    let mut den = x.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let digits = twos.max(fives);
    let scaled = x * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits as usize));
    let int = scaled.to_integer();
    if digits == 0 {
        return int.to_string();
    }
    let negative = int.is_negative();
    let s = int.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits as usize + 1);
    let (whole, frac) = s.split_at(s.len() - digits as usize);
    format!("{}{}.{}", if negative { "-" } else { "" }, whole, frac)
}

/// Best rational approximation of `x` with denominator at most `max_den`, via continued fractions.
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(max_den) {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let approx = BigRational::new(h1.clone(), k1.clone());
        if (Scalar::to_f64(&approx) - x).abs() <= tol * x.abs().max(1.0) {
            return Some(approx);
        }
        let frac = rem - a;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn renders_terminating_and_repeating() {
        assert_eq!(render_rational(&q(111, 1000)), "0.111");
        assert_eq!(render_rational(&q(3, 20)), "0.15");
        assert_eq!(render_rational(&q(1, 3)), "1/3");
        assert_eq!(render_rational(&q(5, 1)), "5");
        assert_eq!(render_rational(&q(-9, 100)), "-0.09");
        assert_eq!(render_rational(&q(7, 2)), "3.5");
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.3, 1_000_000, 1e-12), Some(q(3, 10)));
        assert_eq!(rationalize(1.0, 1_000_000, 1e-12), Some(q(1, 1)));
        assert_eq!(rationalize(2.0 / 7.0, 1_000_000, 1e-12), Some(q(2, 7)));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(rationalize(phi, 1_000, 1e-12), None);
    }

    #[test]
    fn big_rational_log_survives_overflow() {
        let huge = BigRational::from_integer(num_traits::pow(BigInt::from(10), 400));
        let l = Scalar::ln(&huge);
        assert!((l - 400.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn float_rescale_tracks_log() {
        let mut v = vec![4.0, 2.0];
        let l = <f64 as Scalar>::rescale(&mut v);
        assert_eq!(v, vec![1.0, 0.5]);
        assert!((l - 4f64.ln()).abs() < 1e-15);
    }
}
