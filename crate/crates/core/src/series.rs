//! Truncated multivariate power series with complex coefficients.
//!
//! A [`SeriesRing`] fixes the variable names and the total-degree cutoff and
//! precomputes the monomial multiplication table; every [`Series`] holds a
//! shared handle to its ring and a dense coefficient vector. Vector- and
//! matrix-valued series are plain `Vec<Series>` / `Vec<Vec<Series>>`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::{Error, Result};

pub struct SeriesRing {
    vars: Vec<String>,
    order: usize,
    monomials: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    degrees: Vec<usize>,
    mul_table: Vec<(usize, usize, usize)>,
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesRing")
            .field("vars", &self.vars)
            .field("order", &self.order)
            .finish()
    }
}

impl SeriesRing {
    /// Ring `ℂ[[vars]]` modulo monomials of total degree above `order`.
    pub fn new<S: AsRef<str>>(vars: &[S], order: usize) -> Result<Arc<Self>> {
        let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = vars.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate series variable {dup}")));
        }
        let n = vars.len();
        let mut monomials = Vec::new();
        for deg in 0..=order {
            let mut level = Vec::new();
            compositions(n, deg as u32, &mut vec![0; n], 0, &mut level);
            level.sort_by(|a, b| b.cmp(a));
            monomials.extend(level);
        }
        let degrees: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().sum::<u32>() as usize)
            .collect();
        let index: HashMap<Vec<u32>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut mul_table = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] <= order {
                    let c: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    mul_table.push((i, j, index[&c]));
                }
            }
        }
        Ok(Arc::new(Self {
            vars,
            order,
            monomials,
            index,
            degrees,
            mul_table,
        }))
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn compatible(&self, other: &SeriesRing) -> bool {
        self.order == other.order && self.vars == other.vars
    }
}

fn compositions(n: usize, remaining: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for k in 0..=remaining {
        cur[pos] = k;
        compositions(n, remaining - k, cur, pos + 1, out);
    }
}

#[derive(Clone)]
pub struct Series {
    ring: Arc<SeriesRing>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| format!("{c}·{m:?}"))
            .collect();
        write!(f, "Series[{}]({})", self.ring.vars.join(","), terms.join(" + "))
    }
}

impl Series {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        Self {
            ring: ring.clone(),
            coeffs: vec![Complex64::zero(); ring.monomials.len()],
        }
    }

    pub fn from_constant(ring: &Arc<SeriesRing>, c: Complex64) -> Self {
        let mut s = Self::zero(ring);
        s.coeffs[0] = c;
        s
    }

    /// The degree-one monomial in variable `name`.
    pub fn variable(ring: &Arc<SeriesRing>, name: &str) -> Result<Self> {
        let i = ring
            .var_index(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown series variable {name}")))?;
        let mut s = Self::zero(ring);
        if ring.order >= 1 {
            let mut e = vec![0; ring.vars.len()];
            e[i] = 1;
            s.coeffs[ring.index[&e]] = Complex64::one();
        }
        Ok(s)
    }

    /// Builds a series from `(exponents, coefficient)` pairs; terms above the
    /// truncation order are dropped.
    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Complex64)>>(
        ring: &Arc<SeriesRing>,
        terms: I,
    ) -> Result<Self> {
        let mut s = Self::zero(ring);
        for (e, c) in terms {
            if e.len() != ring.vars.len() {
                return Err(Error::RingMismatch(format!(
                    "exponent {e:?} has wrong length for variables {:?}",
                    ring.vars
                )));
            }
            if let Some(&k) = ring.index.get(&e) {
                s.coeffs[k] += c;
            }
        }
        Ok(s)
    }

    /// Constant series in the same ring as `self`.
    pub fn constant(&self, c: Complex64) -> Series {
        Series::from_constant(&self.ring, c)
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.ring.order
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, exponents: &[u32]) -> Complex64 {
        self.ring
            .index
            .get(exponents)
            .map_or(Complex64::zero(), |&k| self.coeffs[k])
    }

    /// Coefficient of `var^n` (all other exponents zero).
    pub fn coeff_of_power(&self, var: &str, n: u32) -> Complex64 {
        let Some(i) = self.ring.var_index(var) else {
            return Complex64::zero();
        };
        let mut e = vec![0; self.ring.vars.len()];
        e[i] = n;
        self.coeff(&e)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, Complex64)> {
        self.ring.monomials.iter().zip(self.coeffs.iter().copied())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_compatible(&self, other: &Series) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring.compatible(&other.ring)
    }

    fn check(&self, other: &Series) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!(
                "{:?}/order {} vs {:?}/order {}",
                self.ring.vars, self.ring.order, other.ring.vars, other.ring.order
            )))
        }
    }

    pub fn try_add(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Series { ring: self.ring.clone(), coeffs })
    }

    pub fn try_sub(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Series { ring: self.ring.clone(), coeffs })
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        let mut coeffs = vec![Complex64::zero(); self.coeffs.len()];
        for &(i, j, k) in &self.ring.mul_table {
            let a = self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            coeffs[k] += a * other.coeffs[j];
        }
        Ok(Series { ring: self.ring.clone(), coeffs })
    }

    pub fn scale(&self, c: Complex64) -> Series {
        Series {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Series {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `Σ_k c_k u^k` for a series `u` with zero constant term; the sum
    /// stops at the truncation order because `u^k` vanishes beyond it.
    fn nilpotent_sum(u: &Series, coeff: impl Fn(usize) -> Complex64) -> Series {
        debug_assert!(u.constant_term().norm() == 0.0);
        let mut out = u.constant(coeff(0));
        let mut pow = u.constant(Complex64::one());
        for k in 1..=u.order() {
            pow = &pow * u;
            out = &out + &pow.scale(coeff(k));
        }
        out
    }

    fn split_constant(&self) -> (Complex64, Series) {
        let c = self.constant_term();
        let mut u = self.clone();
        u.coeffs[0] = Complex64::zero();
        (c, u)
    }

    /// `exp(a)`, expanded about the constant term.
    pub fn exp(&self) -> Series {
        let (c, u) = self.split_constant();
        let mut fact = 1.0;
        let facts: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                fact
            })
            .collect();
        Series::nilpotent_sum(&u, |k| Complex64::new(1.0 / facts[k], 0.0)).scale(c.exp())
    }

    /// Principal logarithm of the constant term plus the formal expansion.
    pub fn log(&self) -> Result<Series> {
        let (c, u) = self.split_constant();
        if c.is_zero() {
            return Err(Error::Precondition("log of a series with zero constant term".into()));
        }
        let v = u.scale(c.inv());
        let mut out = Series::nilpotent_sum(&v, |k| {
            if k == 0 {
                Complex64::zero()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                Complex64::new(sign / k as f64, 0.0)
            }
        });
        out.coeffs[0] = c.ln();
        Ok(out)
    }

    pub fn inv(&self) -> Result<Series> {
        let (c, u) = self.split_constant();
        if c.is_zero() {
            return Err(Error::Precondition("inverse of a series with zero constant term".into()));
        }
        let ci = c.inv();
        let v = u.scale(ci);
        Ok(Series::nilpotent_sum(&v, |k| {
            Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .scale(ci))
    }

    /// Integer power; negative exponents need an invertible constant term.
    pub fn powi(&self, n: i64) -> Result<Series> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.constant(Complex64::one());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// `exp(e·log a)` with the principal branch on the constant term.
    pub fn pow(&self, e: Complex64) -> Result<Series> {
        if self.constant_term().is_zero() {
            return Err(Error::Precondition("power of a series with zero constant term".into()));
        }
        Ok(self.log()?.scale(e).exp())
    }

    pub fn pow_rational(&self, e: Rational64) -> Result<Series> {
        if e.is_integer() {
            return self.powi(e.to_integer());
        }
        self.pow(Complex64::new(*e.numer() as f64 / *e.denom() as f64, 0.0))
    }

    /// Sets variable `var` to zero.
    pub fn subs_zero(&self, var: &str) -> Result<Series> {
        let i = self
            .ring
            .var_index(var)
            .ok_or_else(|| Error::InvalidInput(format!("unknown series variable {var}")))?;
        let mut out = self.clone();
        for (k, m) in self.ring.monomials.iter().enumerate() {
            if m[i] > 0 {
                out.coeffs[k] = Complex64::zero();
            }
        }
        Ok(out)
    }

    /// Numerical value at a point (truncated polynomial evaluation).
    pub fn evaluate(&self, values: &[Complex64]) -> Result<Complex64> {
        if values.len() != self.ring.vars.len() {
            return Err(Error::RingMismatch(format!(
                "{} values for {} variables",
                values.len(),
                self.ring.vars.len()
            )));
        }
        Ok(self
            .terms()
            .map(|(m, c)| {
                m.iter()
                    .zip(values)
                    .fold(c, |acc, (&e, v)| acc * v.powu(e))
            })
            .sum())
    }

    /// Re-expresses `self` in `target`, which must have the same variables
    /// and a lower or equal order.
    pub fn truncate_to(&self, target: &Arc<SeriesRing>) -> Result<Series> {
        if target.vars != self.ring.vars || target.order > self.ring.order {
            return Err(Error::RingMismatch("truncation target incompatible".into()));
        }
        let mut out = Series::zero(target);
        for (k, m) in target.monomials.iter().enumerate() {
            out.coeffs[k] = self.coeff(m);
        }
        Ok(out)
    }

    /// Divides by the variable `var`. Terms free of `var` must vanish
    /// (within `tol`); the top-degree terms of the result are unknown and
    /// set to zero, so the quotient is exact only up to order `N − 1`.
    pub fn div_var(&self, var: &str, tol: f64) -> Result<Series> {
        let i = self
            .ring
            .var_index(var)
            .ok_or_else(|| Error::InvalidInput(format!("unknown series variable {var}")))?;
        let mut out = Series::zero(&self.ring);
        for (k, m) in self.ring.monomials.iter().enumerate() {
            if m[i] == 0 {
                if self.coeffs[k].norm() > tol {
                    return Err(Error::Precondition(format!(
                        "series is not divisible by {var}"
                    )));
                }
                continue;
            }
            let mut lower = m.clone();
            lower[i] -= 1;
            out.coeffs[self.ring.index[&lower]] = self.coeffs[k];
        }
        Ok(out)
    }

    /// Homogeneous part of total degree `d`.
    pub fn degree_part(&self, d: usize) -> Series {
        let mut out = Series::zero(&self.ring);
        for (k, &deg) in self.ring.degrees.iter().enumerate() {
            if deg == d {
                out.coeffs[k] = self.coeffs[k];
            }
        }
        out
    }

    pub fn approx_eq(&self, other: &Series, tol: f64) -> bool {
        self.is_compatible(other)
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                self.$try(rhs).expect("series ring mismatch")
            }
        }
        impl $trait<Series> for Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                self.$try(&rhs).expect("series ring mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale_re(-1.0)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale_re(-1.0)
    }
}

pub type SeriesVec = Vec<Series>;
pub type SeriesMat = Vec<Vec<Series>>;

pub fn vec_zero(ring: &Arc<SeriesRing>, n: usize) -> SeriesVec {
    vec![Series::zero(ring); n]
}

pub fn mat_identity(ring: &Arc<SeriesRing>, n: usize) -> SeriesMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Series::from_constant(ring, if i == j { Complex64::one() } else { Complex64::zero() }))
                .collect()
        })
        .collect()
}

pub fn mat_from_constants(ring: &Arc<SeriesRing>, m: &DMatrix<Complex64>) -> SeriesMat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Series::from_constant(ring, m[(i, j)])).collect())
        .collect()
}

pub fn mat_constant_part(m: &SeriesMat) -> DMatrix<Complex64> {
    let n = m.len();
    let k = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, k, |i, j| m[i][j].constant_term())
}

pub fn mat_add(a: &SeriesMat, b: &SeriesMat) -> SeriesMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_mul(a: &SeriesMat, b: &SeriesMat) -> SeriesMat {
    let ring = a[0][0].ring().clone();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(Series::zero(&ring), |acc, l| &acc + &(&row[l] * &b[l][j]))
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &SeriesMat, v: &[Series]) -> SeriesVec {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Series::zero(v[0].ring()), |acc, (x, y)| &acc + &(x * y))
        })
        .collect()
}

/// `xᵀ M y` for series vectors/matrix.
pub fn bilinear(x: &[Series], m: &SeriesMat, y: &[Series]) -> Series {
    let my = mat_vec(m, y);
    x.iter()
        .zip(&my)
        .fold(Series::zero(x[0].ring()), |acc, (a, b)| &acc + &(a * b))
}

/// Determinant by cofactor expansion along the first row.
pub fn mat_det(m: &SeriesMat) -> Result<Series> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("determinant of an empty matrix".into()));
    }
    Ok(det_rec(m))
}

fn det_rec(m: &SeriesMat) -> Series {
    let n = m.len();
    match n {
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Series::zero(m[0][0].ring());
            for j in 0..n {
                let minor: SeriesMat = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, s)| s.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &det_rec(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Inverse of a matrix series with invertible constant part `M₀`:
/// `M⁻¹ = Σ_k (−M₀⁻¹N)^k M₀⁻¹` where `N = M − M₀` is nilpotent.
pub fn mat_inverse(m: &SeriesMat) -> Result<SeriesMat> {
    let n = m.len();
    let ring = m[0][0].ring().clone();
    let m0 = mat_constant_part(m);
    let m0_inv = m0
        .try_inverse()
        .ok_or_else(|| Error::Precondition("constant part of the matrix is singular".into()))?;
    let m0_inv_s = mat_from_constants(&ring, &m0_inv);
    let nil: SeriesMat = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    let mut t = s.clone();
                    t.coeffs[0] = Complex64::zero();
                    t
                })
                .collect()
        })
        .collect();
    let step: SeriesMat = mat_mul(&m0_inv_s, &nil)
        .into_iter()
        .map(|row| row.into_iter().map(|s| -s).collect())
        .collect();
    let mut acc = mat_identity(&ring, n);
    let mut pow = mat_identity(&ring, n);
    for _ in 0..ring.order() {
        pow = mat_mul(&pow, &step);
        acc = mat_add(&acc, &pow);
    }
    Ok(mat_mul(&acc, &m0_inv_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn ring_t(n: usize) -> Arc<SeriesRing> {
        SeriesRing::new(&["t"], n).unwrap()
    }

    #[test]
    fn ring_layout() {
        let r = SeriesRing::new(&["t", "s"], 2).unwrap();
        assert_eq!(r.monomials().len(), 6);
        assert_eq!(r.monomials()[0], vec![0, 0]);
        assert!(SeriesRing::new(&["t", "t"], 2).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let r = ring_t(4);
        let t = Series::variable(&r, "t").unwrap();
        let one = t.constant(c(1.0));
        let p = &(&one + &t) * &(&one - &t);
        assert!(p.approx_eq(&(&one - &(&t * &t)), 1e-15));
        assert!((&p * &one).approx_eq(&p, 0.0));
        let geo = Series::from_terms(&r, (0..=4).map(|k| (vec![k], c(1.0)))).unwrap();
        assert!((&geo * &(&one - &t)).approx_eq(&one, 1e-15));
    }

    #[test]
    fn mismatched_rings_rejected() {
        let a = Series::variable(&ring_t(3), "t").unwrap();
        let b = Series::variable(&SeriesRing::new(&["s"], 3).unwrap(), "s").unwrap();
        assert!(matches!(a.try_add(&b), Err(Error::RingMismatch(_))));
        assert!(a.try_mul(&Series::variable(&ring_t(2), "t").unwrap()).is_err());
    }

    #[test]
    fn exp_log_inv_examples() {
        let r = ring_t(5);
        let t = Series::variable(&r, "t").unwrap();
        let one = t.constant(c(1.0));
        let a = &one + &t;
        assert!(a.log().unwrap().exp().approx_eq(&a, 1e-14));
        let geo = Series::from_terms(&r, (0..=5).map(|k| (vec![k], c(1.0)))).unwrap();
        assert!((&one - &t).inv().unwrap().approx_eq(&geo, 1e-14));
        assert!(t.inv().is_err());
        assert!(t.log().is_err());
        assert!(a.pow(c(-1.0)).unwrap().approx_eq(&a.inv().unwrap(), 1e-14));
        assert!(a.powi(0).unwrap().approx_eq(&one, 0.0));
        let sq = &a * &a;
        assert!(sq
            .pow_rational(Rational64::new(1, 2))
            .unwrap()
            .approx_eq(&a, 1e-14));
    }

    #[test]
    fn det_inverse_2x2() {
        let r = ring_t(4);
        let t = Series::variable(&r, "t").unwrap();
        let a = [[1.5, -0.3], [0.7, 2.0]];
        let m: SeriesMat = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        let base = t.constant(c(if i == j { 1.0 } else { 0.0 }));
                        &base + &t.scale_re(a[i][j])
                    })
                    .collect()
            })
            .collect();
        let det = mat_det(&m).unwrap();
        let tr = a[0][0] + a[1][1];
        let dt = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let one = t.constant(c(1.0));
        let closed = &(&one + &t.scale_re(tr)) + &(&t * &t).scale_re(dt);
        assert!(det.approx_eq(&closed, 1e-13));
        assert!(det
            .inv()
            .unwrap()
            .approx_eq(&closed.inv().unwrap(), 1e-12));
        let inv = mat_inverse(&m).unwrap();
        let prod = mat_mul(&m, &inv);
        for (i, row) in prod.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let e = t.constant(c(if i == j { 1.0 } else { 0.0 }));
                assert!(s.approx_eq(&e, 1e-12));
            }
        }
    }

    #[test]
    fn diagonal_and_identity_determinants() {
        let r = ring_t(3);
        let t = Series::variable(&r, "t").unwrap();
        let id = mat_identity(&r, 3);
        assert!(mat_det(&id).unwrap().approx_eq(&t.constant(c(1.0)), 0.0));
        let one = t.constant(c(1.0));
        let d = vec![
            vec![&one + &t, Series::zero(&r)],
            vec![Series::zero(&r), &one + &t],
        ];
        assert!(mat_det(&d).unwrap().approx_eq(&(&one + &t).powi(2).unwrap(), 1e-15));
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 0.2, 0.4, 0.1, 1.7]);
        let mc = m.map(|x| c(x));
        let det = mat_det(&mat_from_constants(&r, &mc)).unwrap();
        assert!((det.constant_term() - c(m.determinant())).norm() < 1e-12);
    }

    #[test]
    fn substitution_and_truncation() {
        let r = SeriesRing::new(&["t", "s"], 3).unwrap();
        let t = Series::variable(&r, "t").unwrap();
        let s = Series::variable(&r, "s").unwrap();
        let a = (&t.constant(c(2.0)) + &(&t * &s)).exp();
        let a0 = a.subs_zero("t").unwrap();
        assert!(a0.approx_eq(&t.constant(c(2.0f64.exp())), 1e-14));
        let r2 = SeriesRing::new(&["t", "s"], 2).unwrap();
        let tr = a.truncate_to(&r2).unwrap();
        assert_eq!(tr.order(), 2);
        assert!((tr.coeff(&[1, 1]) - c(2.0f64.exp())).norm() < 1e-12);
        let v = a.evaluate(&[c(0.0), c(5.0)]).unwrap();
        assert!((v - c(2.0f64.exp())).norm() < 1e-12);
    }

    fn series_from(ring: &Arc<SeriesRing>, v: &[(f64, f64)]) -> Series {
        let mut s = Series::zero(ring);
        for (k, (re, im)) in v.iter().enumerate().take(s.coeffs.len()) {
            s.coeffs[k] = Complex64::new(*re, *im);
        }
        s
    }

    #[test]
    fn division_by_variable() {
        let r = ring_t(4);
        let t = Series::variable(&r, "t").unwrap();
        let e = &t.exp() - &t.constant(c(1.0));
        let q = e.div_var("t", 1e-14).unwrap();
        assert!((q.coeff(&[0]) - 1.0).norm() < 1e-15);
        assert!((q.coeff(&[2]) - 1.0 / 6.0).norm() < 1e-15);
        assert!(t.exp().div_var("t", 1e-14).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig { cases: 48, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, ..Default::default() })]

        #[test]
        fn ring_axioms_and_identities(
            a in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 10),
            b in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 10),
            d in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 10),
        ) {
            let r = SeriesRing::new(&["t", "s"], 3).unwrap();
            let (a, b, d) = (series_from(&r, &a), series_from(&r, &b), series_from(&r, &d));
            proptest::prop_assert!((&(&a * &b) * &d).approx_eq(&(&a * &(&b * &d)), 1e-10));
            proptest::prop_assert!((&a * &(&b + &d)).approx_eq(&(&(&a * &b) + &(&a * &d)), 1e-10));
            proptest::prop_assert!((&a * &b).approx_eq(&(&b * &a), 1e-12));
            let mut unit = a.clone();
            unit.coeffs[0] = Complex64::new(1.0, 0.0) + unit.coeffs[0] * 0.1;
            let one = a.constant(Complex64::one());
            proptest::prop_assert!((&unit * &unit.inv().unwrap()).approx_eq(&one, 1e-9));
            let mut nil = a.clone();
            nil.coeffs[0] = Complex64::zero();
            proptest::prop_assert!((&nil.exp() * &(-&nil).exp()).approx_eq(&one, 1e-9));
            let rt = unit.pow(Complex64::new(0.5, 0.0)).unwrap();
            proptest::prop_assert!((&rt * &rt).approx_eq(&unit, 1e-9));
        }
    }
}
