//! Perron eigendata of nonnegative primitive matrices by power iteration, with an optional
//! exact rational certification.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{dot, rationalize, Scalar, SquareMatrix};
use crate::shift::boolean_primitivity_exponent;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerronOptions {
    /// Relative fixed-point residual `|Bh - ρh|_∞ / (ρ |h|_∞)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions {
            tol: 1e-13,
            max_iter: 1_000_000,
        }
    }
}

/// `B h = ρ h`, `ν B = ρ ν`, `h, ν > 0`, `Σ ν_i h_i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronData {
    pub matrix: SquareMatrix<f64>,
    pub rho: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl PerronData {
    pub fn log_rho(&self) -> f64 {
        self.rho.ln()
    }
}

pub fn is_primitive_support(b: &SquareMatrix<f64>) -> bool {
    let n = b.dim();
    if n == 0 {
        return false;
    }
    let support: Vec<bool> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| *b.get(i, j) > 0.0)
        .collect();
    boolean_primitivity_exponent(n, &support).is_some()
}

/// Dominant eigenpair of a nonnegative primitive matrix.
pub fn perron(b: &SquareMatrix<f64>, opts: PerronOptions) -> Result<PerronData> {
    let n = b.dim();
    if (0..n).any(|i| b.row(i).iter().any(|&x| !(x >= 0.0) || !x.is_finite())) {
        return Err(Error::InvalidArgument(
            "weighted matrix must be finite and nonnegative".into(),
        ));
    }
    if !is_primitive_support(b) {
        return Err(Error::NotPrimitive);
    }
    let uniform = vec![1.0; n];
    let (rho, right, res_r, it_r) = dominant(b, &uniform, opts)?;
    let bt = b.transpose();
    let (rho_l, mut left, res_l, it_l) = dominant(&bt, &uniform, opts)?;

    // A second start must land on the same root; a simple Perron root is start-independent.
    let skewed: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
    let (rho_alt, _, _, _) = dominant(b, &skewed, opts)?;
    let spread = (rho - rho_alt).abs().max((rho - rho_l).abs()) / rho;
    if spread > 1e3 * opts.tol.max(f64::EPSILON) {
        return Err(Error::NotSimple(spread));
    }

    let pairing = dot(&left, &right);
    for v in left.iter_mut() {
        *v /= pairing;
    }
    Ok(PerronData {
        matrix: b.clone(),
        rho,
        right,
        left,
        residual: res_r.max(res_l),
        iterations: it_r.max(it_l),
    })
}

/// Power iteration with a Rayleigh-quotient estimate; returns `(ρ, v, residual, iterations)`
/// with `v` normalised to unit sum.
fn dominant(
    b: &SquareMatrix<f64>,
    start: &[f64],
    opts: PerronOptions,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let mut v: Vec<f64> = start.to_vec();
    normalize_l1(&mut v);
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let w = b.mul_vec(&v);
        let rho = dot(&v, &w) / dot(&v, &v);
        let vmax = v.iter().cloned().fold(0.0, f64::max);
        residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rho * vi).abs())
            .fold(0.0, f64::max)
            / (rho * vmax);
        if residual <= opts.tol {
            return Ok((rho, v, residual, it));
        }
        v = w;
        normalize_l1(&mut v);
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

fn normalize_l1(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Perron data certified in exact rational arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPerron {
    pub rho: BigRational,
    pub right: Vec<BigRational>,
    pub left: Vec<BigRational>,
}

/// Recovers the Perron root as a small-denominator rational from the float data, then
/// solves for both eigenvectors exactly and verifies them. Fails when the root is irrational
/// (or not recognisable at denominator `max_den`).
pub fn exact_perron(
    b: &SquareMatrix<BigRational>,
    approx: &PerronData,
    max_den: u64,
) -> Result<ExactPerron> {
    let rho = rationalize(approx.rho, max_den, 1e-10).ok_or_else(|| {
        Error::ExactUnavailable(format!("Perron root {} is not a recognisable rational", approx.rho))
    })?;
    let right = positive_kernel_vector(b, &rho)?;
    let left = positive_kernel_vector(&b.transpose(), &rho)?;
    if b.mul_vec(&right) != right.iter().map(|x| x.clone() * rho.clone()).collect::<Vec<_>>() {
        return Err(Error::ExactUnavailable("right eigenvector failed verification".into()));
    }
    if b.vec_mul(&left) != left.iter().map(|x| x.clone() * rho.clone()).collect::<Vec<_>>() {
        return Err(Error::ExactUnavailable("left eigenvector failed verification".into()));
    }
    let pairing = dot(&left, &right);
    let left = left.into_iter().map(|x| x / pairing.clone()).collect();
    Ok(ExactPerron { rho, right, left })
}

/// A positive vector spanning the one-dimensional kernel of `B - ρI`, scaled to unit sum.
fn positive_kernel_vector(b: &SquareMatrix<BigRational>, rho: &BigRational) -> Result<Vec<BigRational>> {
    let n = b.dim();
    let mut m: Vec<Vec<BigRational>> = b.rows();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = row[i].clone() - rho.clone();
    }
    // Reduced row echelon form.
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = BigRational::from_integer(1.into()) / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..n {
                    let sub = f.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == n {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return Err(Error::ExactUnavailable(format!(
            "kernel of B - ρI has dimension {}",
            free.len()
        )));
    }
    let f = free[0];
    let mut v = vec![BigRational::zero(); n];
    v[f] = BigRational::from_integer(1.into());
    for (row, &c) in pivots.iter().enumerate() {
        v[c] = -m[row][f].clone();
    }
    let sum = v.iter().fold(BigRational::zero(), |a, x| a + x.clone());
    if sum.is_zero() {
        return Err(Error::ExactUnavailable("kernel vector sums to zero".into()));
    }
    let v: Vec<BigRational> = v.into_iter().map(|x| x / sum.clone()).collect();
    if v.iter().any(|x| !x.is_positive()) {
        return Err(Error::ExactUnavailable("kernel vector is not positive".into()));
    }
    Ok(v)
}

impl<S: Scalar> SquareMatrix<S> {
    /// Row sums, as used by stochasticity checks.
    pub fn row_sums(&self) -> Vec<S> {
        (0..self.dim())
            .map(|i| self.row(i).iter().fold(S::zero(), |a, x| a + x.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn m(rows: Vec<Vec<f64>>) -> SquareMatrix<f64> {
        SquareMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn all_ones() {
        let d = perron(&m(vec![vec![1.0, 1.0], vec![1.0, 1.0]]), PerronOptions::default()).unwrap();
        assert!((d.rho - 2.0).abs() < 1e-14);
        assert!((d.right[0] - d.right[1]).abs() < 1e-14);
        assert!((dot(&d.left, &d.right) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_mean_root() {
        let d = perron(&m(vec![vec![1.0, 1.0], vec![1.0, 0.0]]), PerronOptions::default()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((d.rho - phi).abs() < 1e-12);
        assert!(d.residual <= 1e-13);
        assert!(d.right.iter().chain(&d.left).all(|&x| x > 0.0));
    }

    #[test]
    fn rank_one_rows() {
        let p = 0.3;
        let d = perron(
            &m(vec![vec![p, p], vec![1.0 - p, 1.0 - p]]),
            PerronOptions::default(),
        )
        .unwrap();
        assert!((d.rho - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refuses_reducible_and_reports_non_convergence() {
        let id = m(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(perron(&id, PerronOptions::default()), Err(Error::NotPrimitive));
        let slow = m(vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
        let opts = PerronOptions {
            tol: 1e-13,
            max_iter: 3,
        };
        assert!(matches!(perron(&slow, opts), Err(Error::NonConvergence { iterations: 3, .. })));
    }

    #[test]
    fn exact_certification() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let exact = SquareMatrix::from_rows(vec![
            vec![q(3, 10), q(3, 10)],
            vec![q(7, 10), q(7, 10)],
        ])
        .unwrap();
        let approx = perron(&exact.map(|x| Scalar::to_f64(x)), PerronOptions::default()).unwrap();
        let e = exact_perron(&exact, &approx, 1_000_000).unwrap();
        assert_eq!(e.rho, q(1, 1));
        assert_eq!(e.right, vec![q(3, 10), q(7, 10)]);
        assert_eq!(e.left, vec![q(1, 1), q(1, 1)]);
        assert_eq!(dot(&e.left, &e.right), q(1, 1));

        let golden = SquareMatrix::from_rows(vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let approx = perron(&golden.map(|x| Scalar::to_f64(x)), PerronOptions::default()).unwrap();
        assert!(matches!(
            exact_perron(&golden, &approx, 1_000_000),
            Err(Error::ExactUnavailable(_))
        ));
    }
}
