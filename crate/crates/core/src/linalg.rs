//! Small dense helpers over `i64`, exact rationals and `Complex64`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::{Error, Result};

pub type IMat = Vec<Vec<i64>>;
pub type QMat = Vec<Vec<Rational64>>;

pub fn to_rational(m: &IMat) -> QMat {
    m.iter()
        .map(|row| row.iter().map(|&x| Rational64::from_integer(x)).collect())
        .collect()
}

pub fn identity_i(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul_i(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn mat_vec_i(a: &IMat, v: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn mat_vec_q(a: &QMat, v: &[Rational64]) -> Vec<Rational64> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Rational64::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// Gauss-Jordan inverse over the rationals; `None` when singular.
pub fn inverse_q(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut m: QMat = a.to_vec();
    let mut inv: QMat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational64::one() } else { Rational64::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for j in 0..n {
                    let a = m[col][j];
                    let b = inv[col][j];
                    m[r][j] -= f * a;
                    inv[r][j] -= f * b;
                }
            }
        }
    }
    Some(inv)
}

pub fn det_q(a: &QMat) -> Rational64 {
    let n = a.len();
    let mut m: QMat = a.to_vec();
    let mut det = Rational64::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational64::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in col + 1..n {
            let f = m[r][col] / p;
            if !f.is_zero() {
                for j in col..n {
                    let a = m[col][j];
                    m[r][j] -= f * a;
                }
            }
        }
    }
    det
}

pub fn det_i(a: &IMat) -> i64 {
    let d = det_q(&to_rational(a));
    debug_assert!(d.is_integer());
    d.to_integer()
}

/// Sylvester test on leading principal minors, exact.
pub fn is_positive_definite_i(a: &IMat) -> bool {
    let n = a.len();
    (1..=n).all(|k| {
        let minor: IMat = (0..k).map(|i| a[i][..k].to_vec()).collect();
        det_i(&minor) > 0
    })
}

pub fn cmat(a: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| a[i][j])
}

pub fn cmat_from_q(a: &QMat) -> DMatrix<Complex64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| Complex64::new(q_to_f64(a[i][j]), 0.0))
}

pub fn cmat_from_i(a: &IMat) -> DMatrix<Complex64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| Complex64::new(a[i][j] as f64, 0.0))
}

pub fn q_to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub fn solve_c(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Inconsistency("singular linear system".into()))
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Cholesky succeeds on the Hermitian part.
pub fn is_positive_definite_c(a: &DMatrix<Complex64>) -> bool {
    let herm = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    herm.cholesky().is_some()
}
