//! Smith normal form over `i64` with overflow checks, and enumeration of
//! the rational solutions of `A·μ ≡ r (mod ℤⁿ)`.

use num_rational::Rational64;
use num_traits::Zero;

use crate::linalg::{identity_i, IMat};
use crate::{Error, Result};

/// `P·A·Q = D` with `P`, `Q` unimodular and `D` diagonal, nonnegative,
/// each diagonal entry dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub p: IMat,
    pub q: IMat,
    pub diagonal: Vec<i64>,
}

fn ck(x: Option<i64>) -> Result<i64> {
    x.ok_or(Error::Overflow("Smith normal form"))
}

fn row_combine(m: &mut IMat, target: usize, source: usize, factor: i64) -> Result<()> {
    for j in 0..m[0].len() {
        let v = ck(m[source][j].checked_mul(factor))?;
        m[target][j] = ck(m[target][j].checked_sub(v))?;
    }
    Ok(())
}

fn col_combine(m: &mut IMat, target: usize, source: usize, factor: i64) -> Result<()> {
    for row in m.iter_mut() {
        let v = ck(row[source].checked_mul(factor))?;
        row[target] = ck(row[target].checked_sub(v))?;
    }
    Ok(())
}

fn swap_cols(m: &mut IMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

pub fn smith_normal_form(a: &IMat) -> Result<SmithForm> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("Smith normal form expects a square matrix".into()));
    }
    let mut d = a.clone();
    let mut p = identity_i(n);
    let mut q = identity_i(n);

    for k in 0..n {
        loop {
            // pivot: smallest nonzero absolute value in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if d[i][j] != 0
                        && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            d.swap(k, pi);
            p.swap(k, pi);
            swap_cols(&mut d, k, pj);
            swap_cols(&mut q, k, pj);

            let mut clean = true;
            for i in k + 1..n {
                let f = d[i][k] / d[k][k];
                row_combine(&mut d, i, k, f)?;
                row_combine(&mut p, i, k, f)?;
                if d[i][k] != 0 {
                    clean = false;
                }
            }
            for j in k + 1..n {
                let f = d[k][j] / d[k][k];
                col_combine(&mut d, j, k, f)?;
                col_combine(&mut q, j, k, f)?;
                if d[k][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let piv = d[k][k];
            let bad = (k + 1..n).find_map(|i| {
                (k + 1..n).find(|&j| d[i][j] % piv != 0).map(|_| i)
            });
            match bad {
                Some(i) => {
                    // fold row i into row k and repeat
                    row_combine(&mut d, k, i, -1)?;
                    row_combine(&mut p, k, i, -1)?;
                }
                None => break,
            }
        }
        if d[k][k] < 0 {
            for j in 0..n {
                d[k][j] = -d[k][j];
                p[k][j] = -p[k][j];
            }
        }
    }
    let diagonal = (0..n).map(|i| d[i][i]).collect();
    Ok(SmithForm { p, q, diagonal })
}

/// All `μ ∈ [0,1)ⁿ` with `A·μ − r ∈ ℤⁿ`, in lexicographic order. Requires
/// `det A ≠ 0`; the count is `|det A|`.
pub fn solve_congruence(a: &IMat, r: &[Rational64]) -> Result<Vec<Vec<Rational64>>> {
    let n = a.len();
    let snf = smith_normal_form(a)?;
    if snf.diagonal.iter().any(|&d| d == 0) {
        return Err(Error::Precondition("congruence matrix is singular".into()));
    }
    let pr: Vec<Rational64> = snf
        .p
        .iter()
        .map(|row| {
            row.iter()
                .zip(r)
                .fold(Rational64::zero(), |acc, (&x, y)| acc + *y * x)
        })
        .collect();

    let mut out = Vec::new();
    let mut counter = vec![0i64; n];
    loop {
        let nu: Vec<Rational64> = (0..n)
            .map(|i| (pr[i] + counter[i]) / snf.diagonal[i])
            .collect();
        let mu: Vec<Rational64> = snf
            .q
            .iter()
            .map(|row| {
                let v = row
                    .iter()
                    .zip(&nu)
                    .fold(Rational64::zero(), |acc, (&x, y)| acc + *y * x);
                v - v.floor()
            })
            .collect();
        out.push(mu);

        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                out.dedup();
                return Ok(out);
            }
            counter[i] += 1;
            if counter[i] < snf.diagonal[i] {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}
