//! Formal deformation of Verlinde points.
//!
//! For a list of pairs `(t_i, V_i)` the point `f` moves to `f_t = f·e^{ξ(t)}`
//! where `ξ + h′⁻¹ Σ t_i dTr_{V_i}(f·e^ξ) = 0`. The solution is built by
//! fixed-point sweeps in the truncated series ring; every sweep fixes one
//! more total degree.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::One;

use crate::charfun::Character;
use crate::levels::{Level, VerlindePoint};
use crate::linalg;
use crate::liealg::{RootSystem, TorusPoint};
use crate::series::{self, Series, SeriesMat, SeriesRing, SeriesVec};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DeformationSpec {
    pub terms: Vec<(String, Character)>,
    pub order: usize,
}

impl DeformationSpec {
    pub fn new(terms: Vec<(String, Character)>, order: usize) -> Result<Self> {
        let mut names: Vec<&str> = terms.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("deformation variable names must be distinct".into()));
        }
        Ok(Self { terms, order })
    }

    /// No deformation; series are constants in a single dummy variable.
    pub fn empty(order: usize) -> Self {
        Self { terms: Vec::new(), order }
    }

    pub fn variable_names(&self) -> Vec<String> {
        if self.terms.is_empty() {
            vec!["t".to_string()]
        } else {
            self.terms.iter().map(|(n, _)| n.clone()).collect()
        }
    }

    pub fn ring(&self) -> Result<Arc<SeriesRing>> {
        SeriesRing::new(&self.variable_names(), self.order)
    }

    /// `(t_i as a series, V_i)` in `ring`.
    pub fn weighted_terms<'a>(&'a self, ring: &Arc<SeriesRing>) -> Result<Vec<(Series, &'a Character)>> {
        self.terms
            .iter()
            .map(|(n, ch)| Ok((Series::variable(ring, n)?, ch)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DeformedPoint {
    pub base: VerlindePoint,
    /// Correction in coweight coordinates, zero constant term.
    pub xi: SeriesVec,
}

impl DeformedPoint {
    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.xi[0].ring()
    }
}

/// `e^λ(f)·exp(λ(ξ))`.
pub fn weight_exp_series(f: &TorusPoint, lambda: &[i64], xi: &[Series]) -> Series {
    let ring = xi[0].ring();
    let arg = lambda
        .iter()
        .zip(xi)
        .filter(|(&l, _)| l != 0)
        .fold(Series::zero(ring), |acc, (&l, x)| &acc + &x.scale_re(l as f64));
    arg.exp().scale(f.exp_weight(lambda))
}

pub fn trace_series(ch: &Character, f: &TorusPoint, xi: &[Series]) -> Series {
    ch.iter().fold(Series::zero(xi[0].ring()), |acc, (w, &m)| {
        &acc + &weight_exp_series(f, w, xi).scale_re(m as f64)
    })
}

pub fn gradient_series(ch: &Character, f: &TorusPoint, xi: &[Series]) -> SeriesVec {
    let n = xi.len();
    let mut g = series::vec_zero(xi[0].ring(), n);
    for (w, &m) in ch.iter() {
        let e = weight_exp_series(f, w, xi).scale_re(m as f64);
        for (gi, &wi) in g.iter_mut().zip(w) {
            if wi != 0 {
                *gi = &*gi + &e.scale_re(wi as f64);
            }
        }
    }
    g
}

pub fn hessian_series(ch: &Character, f: &TorusPoint, xi: &[Series]) -> SeriesMat {
    let n = xi.len();
    let ring = xi[0].ring();
    let mut h: SeriesMat = (0..n).map(|_| series::vec_zero(ring, n)).collect();
    for (w, &m) in ch.iter() {
        let e = weight_exp_series(f, w, xi).scale_re(m as f64);
        for i in 0..n {
            for j in 0..n {
                if w[i] != 0 && w[j] != 0 {
                    h[i][j] = &h[i][j] + &e.scale_re((w[i] * w[j]) as f64);
                }
            }
        }
    }
    h
}

pub(crate) fn h_prime_inverse_c(level: &Level) -> Result<DMatrix<Complex64>> {
    Ok(linalg::cmat_from_q(&level.h_prime_inverse()?))
}

fn apply_const(m: &DMatrix<Complex64>, v: &[Series]) -> SeriesVec {
    let ring = v[0].ring();
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols()).fold(Series::zero(ring), |acc, j| &acc + &v[j].scale(m[(i, j)]))
        })
        .collect()
}

/// `Σ c_i · dTr_{V_i}(f e^ξ)` for series coefficients `c_i`.
pub fn weighted_gradient(terms: &[(Series, &Character)], f: &TorusPoint, xi: &[Series]) -> SeriesVec {
    let n = xi.len();
    let mut acc = series::vec_zero(xi[0].ring(), n);
    for (c, ch) in terms {
        let g = gradient_series(ch, f, xi);
        for (a, gi) in acc.iter_mut().zip(&g) {
            *a = &*a + &(c * gi);
        }
    }
    acc
}

/// `Σ c_i · H_{V_i}(f e^ξ)`.
pub fn weighted_hessian(terms: &[(Series, &Character)], f: &TorusPoint, xi: &[Series]) -> SeriesMat {
    let n = xi.len();
    let ring = xi[0].ring();
    let mut acc: SeriesMat = (0..n).map(|_| series::vec_zero(ring, n)).collect();
    for (c, ch) in terms {
        let h = hessian_series(ch, f, xi);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = &acc[i][j] + &(c * &h[i][j]);
            }
        }
    }
    acc
}

/// Solves `ξ + h′⁻¹ Σ c_i dTr_{V_i}(f e^ξ) = 0` with `c_i` of positive order.
pub fn solve_xi(
    ring: &Arc<SeriesRing>,
    h_prime_inv: &DMatrix<Complex64>,
    terms: &[(Series, &Character)],
    f: &TorusPoint,
) -> Result<SeriesVec> {
    if terms.iter().any(|(c, _)| c.constant_term().norm() != 0.0) {
        return Err(Error::Precondition("deformation coefficients need zero constant term".into()));
    }
    let n = f.rank();
    let mut xi = series::vec_zero(ring, n);
    if terms.is_empty() {
        return Ok(xi);
    }
    for _ in 0..=ring.order() {
        let g = weighted_gradient(terms, f, &xi);
        xi = apply_const(h_prime_inv, &g).into_iter().map(|s| -s).collect();
    }
    Ok(xi)
}

pub fn solve_deformed(
    rs: &RootSystem,
    level: &Level,
    spec: &DeformationSpec,
    f: &VerlindePoint,
) -> Result<DeformedPoint> {
    if !f.is_regular {
        return Err(Error::SingularPoint);
    }
    if f.point.rank() != rs.rank {
        return Err(Error::InvalidInput("point rank does not match the root system".into()));
    }
    let ring = spec.ring()?;
    let hinv = h_prime_inverse_c(level)?;
    let terms = spec.weighted_terms(&ring)?;
    let xi = solve_xi(&ring, &hinv, &terms, &f.point)?;
    Ok(DeformedPoint { base: f.clone(), xi })
}

/// `Δ(f e^ξ)² = ∏_{α>0}(1 − e^α)(1 − e^{−α})` as a series.
pub fn denominator_sq_series(rs: &RootSystem, f: &TorusPoint, xi: &[Series]) -> Series {
    let one = xi[0].constant(Complex64::one());
    rs.positive_roots.iter().fold(one.clone(), |acc, a| {
        let neg: Vec<i64> = a.iter().map(|x| -x).collect();
        let p = &(&one - &weight_exp_series(f, a, xi)) * &(&one - &weight_exp_series(f, &neg, xi));
        &acc * &p
    })
}

/// `det⁻¹[1 + h′⁻¹ Σ t_i H_{V_i}(f_t)] · Δ(f_t)² / |F|`.
pub fn theta_t(
    rs: &RootSystem,
    level: &Level,
    spec: &DeformationSpec,
    dp: &DeformedPoint,
    f_order: i64,
) -> Result<Series> {
    let ring = dp.ring().clone();
    let hinv = h_prime_inverse_c(level)?;
    let terms = spec.weighted_terms(&ring)?;
    theta_from_terms(rs, &hinv, &terms, &dp.base.point, &dp.xi, f_order)
}

pub(crate) fn theta_from_terms(
    rs: &RootSystem,
    hinv: &DMatrix<Complex64>,
    terms: &[(Series, &Character)],
    f: &TorusPoint,
    xi: &[Series],
    f_order: i64,
) -> Result<Series> {
    let ring = xi[0].ring();
    let n = xi.len();
    let hess = weighted_hessian(terms, f, xi);
    let hinv_s = series::mat_from_constants(ring, hinv);
    let m = series::mat_add(&series::mat_identity(ring, n), &series::mat_mul(&hinv_s, &hess));
    let det = series::mat_det(&m)?;
    let d2 = denominator_sq_series(rs, f, xi);
    Ok((&d2 * &det.inv()?).scale_re(1.0 / f_order as f64))
}

/// `Tr_U(f_t)`.
pub fn trace_at(dp: &DeformedPoint, u: &Character) -> Series {
    trace_series(u, &dp.base.point, &dp.xi)
}

/// `max |coefficient|` of `ξ + h′⁻¹ Σ t_i dTr_{V_i}(f e^ξ)`.
pub fn residual(level: &Level, spec: &DeformationSpec, dp: &DeformedPoint) -> Result<f64> {
    let hinv = h_prime_inverse_c(level)?;
    let terms = spec.weighted_terms(dp.ring())?;
    let g = apply_const(&hinv, &weighted_gradient(&terms, &dp.base.point, &dp.xi));
    Ok(dp
        .xi
        .iter()
        .zip(&g)
        .map(|(a, b)| (a + b).max_abs_coeff())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::irred_character;
    use num_traits::Zero;
    use crate::levels::{canonical_level, regular_orbit_representatives, PointSet};
    use crate::liealg::{root_system_from_label, weyl_denominator_sq};
    use nalgebra::DVector;

    fn setup(label: &str, k: i64) -> (RootSystem, Level, Vec<VerlindePoint>) {
        let rs = root_system_from_label(label).unwrap();
        let lvl = canonical_level(&rs, k).unwrap();
        let reps = regular_orbit_representatives(&rs, &lvl, PointSet::Shifted).unwrap();
        (rs, lvl, reps)
    }

    fn adjoint_spec(rs: &RootSystem, order: usize) -> DeformationSpec {
        let adj = irred_character(rs, &rs.highest_root).unwrap();
        DeformationSpec::new(vec![("t".into(), adj)], order).unwrap()
    }

    #[test]
    fn trivial_deformation_is_zero() {
        let (rs, lvl, reps) = setup("A1", 2);
        let spec = DeformationSpec::new(vec![("t".into(), Character::trivial(1))], 3).unwrap();
        for p in &reps {
            let dp = solve_deformed(&rs, &lvl, &spec, p).unwrap();
            assert!(dp.xi.iter().all(|x| x.max_abs_coeff() == 0.0));
            let th = theta_t(&rs, &lvl, &spec, &dp, lvl.f_order).unwrap();
            assert!((th.constant_term().re - p.theta0).abs() < 1e-12);
            assert!(th.degree_part(1).max_abs_coeff() < 1e-14);
            assert!((trace_at(&dp, &Character::trivial(1)).constant_term() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn first_order_hand_value() {
        let (rs, lvl, reps) = setup("A1", 1);
        let spec = adjoint_spec(&rs, 3);
        let p = reps
            .iter()
            .find(|p| p.point.mu[0] == num_rational::Rational64::new(1, 6))
            .unwrap();
        let dp = solve_deformed(&rs, &lvl, &spec, p).unwrap();
        let z = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let expect = -(z * z - (z * z).inv()) / 3.0;
        assert!((dp.xi[0].coeff(&[1]) - expect).norm() < 1e-12);
        assert!(residual(&lvl, &spec, &dp).unwrap() < 1e-12);
        let bad = VerlindePoint { is_regular: false, ..p.clone() };
        assert!(matches!(solve_deformed(&rs, &lvl, &spec, &bad), Err(Error::SingularPoint)));
        assert!(DeformationSpec::new(
            vec![("t".into(), Character::trivial(1)), ("t".into(), Character::trivial(1))],
            2
        )
        .is_err());
    }

    /// Solves the deformation equation at a numerical `t` by Newton's method.
    fn numeric_point(rs: &RootSystem, lvl: &Level, v: &Character, f: &TorusPoint, t: f64) -> Vec<Complex64> {
        let hinv = h_prime_inverse_c(lvl).unwrap();
        let n = rs.rank;
        let mut xi = vec![Complex64::zero(); n];
        for _ in 0..60 {
            let g = TorusPoint::with_correction(rs, f.mu.clone(), xi.clone());
            let grad = crate::charfun::trace_gradient(v, &g);
            let hess = crate::charfun::trace_hessian(v, &g);
            let r = DVector::from_fn(n, |i, _| {
                xi[i] + (0..n).map(|j| hinv[(i, j)] * grad[j] * t).sum::<Complex64>()
            });
            let jac = DMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { Complex64::one() } else { Complex64::zero() };
                d + (0..n).map(|l| hinv[(i, l)] * hess[l][j] * t).sum::<Complex64>()
            });
            let step = jac.lu().solve(&r).unwrap();
            for i in 0..n {
                xi[i] -= step[i];
            }
        }
        xi
    }

    fn numeric_theta(rs: &RootSystem, lvl: &Level, v: &Character, f: &TorusPoint, t: f64) -> Complex64 {
        let xi = numeric_point(rs, lvl, v, f, t);
        let g = TorusPoint::with_correction(rs, f.mu.clone(), xi);
        let hinv = h_prime_inverse_c(lvl).unwrap();
        let h = linalg::cmat(&crate::charfun::trace_hessian(v, &g));
        let m = DMatrix::identity(rs.rank, rs.rank) + hinv * h * Complex64::new(t, 0.0);
        weyl_denominator_sq(rs, &g) / m.determinant() / lvl.f_order as f64
    }

    #[test]
    fn first_order_against_finite_differences() {
        for (label, k) in [("A1", 1), ("A1", 3), ("A2", 1)] {
            let (rs, lvl, reps) = setup(label, k);
            let spec = adjoint_spec(&rs, 2);
            let v = &spec.terms[0].1;
            let u = irred_character(&rs, &rs.highest_root).unwrap();
            for p in &reps {
                let dp = solve_deformed(&rs, &lvl, &spec, p).unwrap();
                let th = theta_t(&rs, &lvl, &spec, &dp, lvl.f_order).unwrap();
                let h = 1e-5;
                let fd = (numeric_theta(&rs, &lvl, v, &p.point, h)
                    - numeric_theta(&rs, &lvl, v, &p.point, -h))
                    / (2.0 * h);
                assert!((fd - th.coeff(&[1])).norm() < 1e-6, "{label} {k}: {fd} vs {}", th.coeff(&[1]));
                let tr = |t: f64| {
                    let xi = numeric_point(&rs, &lvl, v, &p.point, t);
                    crate::charfun::trace_eval(&u, &TorusPoint::with_correction(&rs, p.point.mu.clone(), xi))
                };
                let fd = (tr(h) - tr(-h)) / (2.0 * h);
                assert!((fd - trace_at(&dp, &u).coeff(&[1])).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn weyl_equivariance_and_truncation() {
        for (label, k) in [("A1", 2), ("A2", 1), ("C2", 1)] {
            let (rs, lvl, reps) = setup(label, k);
            let spec = adjoint_spec(&rs, 3);
            let spec_lo = adjoint_spec(&rs, 2);
            for p in &reps {
                let dp = solve_deformed(&rs, &lvl, &spec, p).unwrap();
                assert!(residual(&lvl, &spec, &dp).unwrap() < 1e-12);
                let th = theta_t(&rs, &lvl, &spec, &dp, lvl.f_order).unwrap();
                assert!((th.constant_term().re - p.theta0).abs() < 1e-12);
                for w in rs.weyl_group() {
                    let moved = p.point.act(&rs, w);
                    let q = VerlindePoint { point: moved, ..p.clone() };
                    let dq = solve_deformed(&rs, &lvl, &spec, &q).unwrap();
                    for (i, row) in w.coweight_action.iter().enumerate() {
                        let expect = row
                            .iter()
                            .zip(&dp.xi)
                            .fold(Series::zero(dp.ring()), |acc, (&a, x)| &acc + &x.scale_re(a as f64));
                        assert!(dq.xi[i].approx_eq(&expect, 1e-12));
                    }
                    let tq = theta_t(&rs, &lvl, &spec, &dq, lvl.f_order).unwrap();
                    assert!(tq.approx_eq(&th, 1e-10));
                }
                let lo = solve_deformed(&rs, &lvl, &spec_lo, p).unwrap();
                for (a, b) in dp.xi.iter().zip(&lo.xi) {
                    assert!(a.truncate_to(b.ring()).unwrap().approx_eq(b, 1e-13));
                }
            }
        }
    }
}
