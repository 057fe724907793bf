//! Dense complex matrix helpers shared by the algebraic layers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

/// Dense complex matrix. Square operators, N x N^2 morphisms and vectors all use it.
pub type CMat = DMatrix<Complex64>;

/// Default residual tolerance for single identities.
pub const TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius residual `|a - b| / max(1, |b|)`.
pub fn residual(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "residual of mismatched shapes");
    frob(&(a - b)) / frob(b).max(1.0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "difference of mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product with the first factor as the major index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Inverse of a square matrix, or `Singular`.
pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Integer power of a square matrix; negative exponents invert first.
pub fn mat_pow(m: &CMat, e: i64) -> Result<CMat> {
    let base = if e < 0 { inverse(m)? } else { m.clone() };
    let mut out = identity(m.nrows());
    let mut p = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &p;
        }
        p = &p * &p;
        k >>= 1;
    }
    Ok(out)
}

/// Returns `lambda` with `m = lambda * Id`, checked to `tol` relative to `|lambda|`.
pub fn scalar_part(m: &CMat, tol: f64) -> Result<Complex64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "scalar part of a non-square matrix");
    let lambda = m.trace() / n as f64;
    let mut off = m.clone();
    for i in 0..n {
        off[(i, i)] -= lambda;
    }
    let res = frob(&off) / lambda.norm().max(1.0);
    if res > tol {
        return Err(Error::NotScalar { residual: res });
    }
    Ok(lambda)
}

/// True when every entry is (numerically) zero.
pub fn is_zero(m: &CMat, tol: f64) -> bool {
    m.iter().all(|z| z.norm() <= tol || z.is_zero())
}

/// Real `x^(p/q)` helper used for odd roots: keeps the sign of `x` for odd `q`.
pub fn odd_root(x: f64, n: usize) -> f64 {
    let r = x.abs().powf(1.0 / n as f64);
    if x < 0.0 {
        -r
    } else {
        r
    }
}
