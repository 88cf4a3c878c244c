//! Kähler-type deformation along `t ∈ (−1, 0]`.
//!
//! A point `μ` (coweight coordinates, `f = exp(2πiμ)`) is a solution when
//!
//! ```text
//! Φ(μ) = h′μ + (1/2πi)[s·dTr_V(f) − Σ_{α>0} α(log(1+te^α) − log(1+te^{−α}))] − ρ ∈ ℤ^ℓ.
//! ```
//!
//! For real `μ`, `s = 0` and `t > −1` every `1 + te^α` has positive real
//! part, so the principal logarithm is continuous along the whole interval
//! and the integer vector `Φ(μ)` is constant along a continued branch. At
//! `t = 0` this is the `F_ρ` congruence, and at `t = −1` it degenerates to
//! `hμ ∈ ℤ^ℓ`.
//!
//! In the exponential coordinate `ξ = 2πiδ` the derivative of `2πi·Φ` is
//! `J = h′ + sH_V − t Σ_{all α} e^α/(1+te^α) α⊗α`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::charfun::{trace_eval, trace_gradient, trace_hessian, Character};
use crate::deform::{gradient_series, hessian_series, trace_series, weight_exp_series};
use crate::levels::{regular_orbit_representatives, Level, PointSet};
use crate::linalg;
use crate::liealg::{pair_c, RootSystem, TorusPoint};
use crate::series::{self, Series, SeriesMat, SeriesRing, SeriesVec};
use crate::{Error, Result};

fn check_setting(rs: &RootSystem, level: &Level) -> Result<()> {
    if rs.torus_rank > 0 {
        return Err(Error::Precondition(
            "the Kähler deformation is implemented for semisimple groups only".into(),
        ));
    }
    if !level.is_admissible() {
        return Err(Error::Inadmissible);
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > -1.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("t must lie in (−1, ∞), got {t}")));
    }
    Ok(())
}

/// True when `h ≻ c`, the range where the continuation is guaranteed.
pub fn within_guarantee(rs: &RootSystem, level: &Level) -> bool {
    level.dominates_c(rs)
}

fn neg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

fn exp_at(lambda: &[i64], mu: &[Complex64]) -> Complex64 {
    (pair_c(lambda, mu) * Complex64::new(0.0, 2.0 * PI)).exp()
}

fn point_from_mu(rs: &RootSystem, mu: &[Complex64]) -> TorusPoint {
    let seed: Vec<Rational64> = vec![Rational64::zero(); mu.len()];
    let xi: Vec<Complex64> = mu.iter().map(|x| x * Complex64::new(0.0, 2.0 * PI)).collect();
    TorusPoint::with_correction(rs, seed, xi)
}

/// Unreduced `Φ(μ)` for complex `μ` and numeric `s`.
pub fn chi_value(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    s: Complex64,
    t: f64,
    mu: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_setting(rs, level)?;
    check_t(t)?;
    if mu.len() != rs.rank {
        return Err(Error::InvalidInput("coweight has the wrong rank".into()));
    }
    let n = rs.rank;
    let mut acc = vec![Complex64::zero(); n];
    if s != Complex64::zero() {
        let g = trace_gradient(v, &point_from_mu(rs, mu));
        for (a, gi) in acc.iter_mut().zip(g) {
            *a += s * gi;
        }
    }
    for a in &rs.positive_roots {
        let lp = (1.0 + t * exp_at(a, mu)).ln();
        let lm = (1.0 + t * exp_at(&neg(a), mu)).ln();
        for (x, &ai) in acc.iter_mut().zip(a) {
            *x -= (lp - lm) * ai as f64;
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    Ok((0..n)
        .map(|i| {
            let lin: Complex64 = (0..n).map(|j| mu[j] * level.h_prime[i][j] as f64).sum();
            lin + acc[i] / two_pi_i - rs.rho[i] as f64
        })
        .collect())
}

/// `Φ(μ)` reduced modulo `ℤ^ℓ` (real parts to the nearest integer); zero
/// exactly at solutions.
pub fn chi_residual(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    s: Complex64,
    t: f64,
    mu: &[Complex64],
) -> Result<Vec<Complex64>> {
    Ok(chi_value(rs, level, v, s, t, mu)?
        .into_iter()
        .map(|z| Complex64::new(z.re - z.re.round(), z.im))
        .collect())
}

/// `J = h′ + sH_V − t Σ_{all α} e^α/(1+te^α) α⊗α` at complex `μ`.
pub fn chi_jacobian(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    s: Complex64,
    t: f64,
    mu: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    check_setting(rs, level)?;
    check_t(t)?;
    let n = rs.rank;
    let mut j = linalg::cmat_from_i(&level.h_prime);
    if s != Complex64::zero() {
        let hv = trace_hessian(v, &point_from_mu(rs, mu));
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] += s * hv[r][c];
            }
        }
    }
    for a in rs.all_roots() {
        let e = exp_at(&a, mu);
        let w = t * e / (1.0 + t * e);
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] -= w * (a[r] * a[c]) as f64;
            }
        }
    }
    Ok(j)
}

/// Tuning of the predictor–corrector continuation.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub newton_tol: f64,
    pub max_halvings: usize,
    pub condition_limit: f64,
    pub collision_limit: f64,
    /// Spacing of the synchronisation points where the whole configuration
    /// is checked for collisions.
    pub checkpoint: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_step: 5e-2,
            newton_tol: 1e-12,
            max_halvings: 50,
            condition_limit: 1e12,
            collision_limit: 1e-8,
            checkpoint: 5e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackedPoint {
    /// Starting point at `t = 0`, in the fundamental alcove.
    pub seed: Vec<Rational64>,
    /// The integer vector `Φ(μ)` kept fixed along the branch.
    pub target: Vec<i64>,
    pub mu: Vec<f64>,
    pub residual: f64,
}

impl TrackedPoint {
    /// The continued point as a torus element (rational seed plus a
    /// complex correction).
    pub fn torus_point(&self, rs: &RootSystem) -> TorusPoint {
        let xi = self
            .mu
            .iter()
            .zip(&self.seed)
            .map(|(m, s)| Complex64::new(0.0, 2.0 * PI * (m - linalg::q_to_f64(*s))))
            .collect();
        TorusPoint::with_correction(rs, self.seed.clone(), xi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationState {
    pub t: f64,
    pub points: Vec<TrackedPoint>,
    pub accepted_steps: usize,
    pub halvings: usize,
    pub max_residual: f64,
    pub max_condition: f64,
    /// Smallest distance, modulo the lattice, between a tracked point and a
    /// Weyl image of a tracked point (itself included, through a wall).
    pub min_separation: f64,
    /// Set when `h ≻ c` fails; results are still produced.
    pub outside_guarantee: bool,
    /// Whether the points are Weyl-orbit representatives.
    pub orbit_reps: bool,
}

/// Real-coordinate evaluator for `s = 0`.
struct Tracker {
    hp: DMatrix<f64>,
    rho: DVector<f64>,
    roots: Vec<DVector<f64>>,
    opts: ContinuationOptions,
}

impl Tracker {
    fn new(rs: &RootSystem, level: &Level, opts: ContinuationOptions) -> Self {
        let n = rs.rank;
        let hp = DMatrix::from_fn(n, n, |i, j| level.h_prime[i][j] as f64);
        let rho = DVector::from_iterator(n, rs.rho.iter().map(|&x| x as f64));
        let roots = rs
            .positive_roots
            .iter()
            .map(|a| DVector::from_iterator(n, a.iter().map(|&x| x as f64)))
            .collect();
        Self { hp, rho, roots, opts }
    }

    fn phase(a: &DVector<f64>, mu: &DVector<f64>) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * a.dot(mu))
    }

    fn phi(&self, mu: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut out = &self.hp * mu - &self.rho;
        for a in &self.roots {
            let arg = (1.0 + t * Self::phase(a, mu)).arg();
            out -= a * (arg / PI);
        }
        out
    }

    fn jacobian(&self, mu: &DVector<f64>, t: f64) -> DMatrix<f64> {
        let mut j = self.hp.clone();
        for a in &self.roots {
            let e = Self::phase(a, mu);
            let w = 2.0 * t * (e / (1.0 + t * e)).re;
            j -= (a * a.transpose()) * w;
        }
        j
    }

    fn dphi_dt(&self, mu: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut out = DVector::zeros(mu.len());
        for a in &self.roots {
            let e = Self::phase(a, mu);
            out -= a * ((e / (1.0 + t * e)).im / PI);
        }
        out
    }

    fn newton(&self, mut mu: DVector<f64>, t: f64, target: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let mut res = (self.phi(&mu, t) - target).amax();
        for _ in 0..12 {
            if res < self.opts.newton_tol {
                return Some((mu, res));
            }
            let r = self.phi(&mu, t) - target;
            let step = self.jacobian(&mu, t).lu().solve(&r)?;
            mu -= step;
            let next = (self.phi(&mu, t) - target).amax();
            if !next.is_finite() || next > res && next > 1e2 * self.opts.newton_tol {
                return None;
            }
            res = next;
        }
        (res < self.opts.newton_tol).then_some((mu, res))
    }

    /// Tracks one branch from `t0` to `t1`; returns the endpoint, the
    /// number of accepted steps and of step halvings.
    fn track(
        &self,
        mut mu: DVector<f64>,
        target: &DVector<f64>,
        t0: f64,
        t1: f64,
        step0: f64,
    ) -> Result<(DVector<f64>, f64, usize, usize, f64)> {
        let dir = if t1 < t0 { -1.0 } else { 1.0 };
        let mut t = t0;
        let mut h = step0;
        let mut accepted = 0;
        let mut halvings = 0;
        let mut res = (self.phi(&mu, t) - target).amax();
        let mut consecutive = 0;
        while (t1 - t) * dir > 0.0 {
            let dt = dir * h.min((t1 - t).abs());
            let tn = if (t1 - t).abs() <= h { t1 } else { t + dt };
            let dt = tn - t;
            let slope = self
                .jacobian(&mu, t)
                .lu()
                .solve(&(-self.dphi_dt(&mu, t)))
                .ok_or_else(|| Error::Continuation(format!("singular Jacobian at t = {t}")))?;
            let predicted = &mu + slope * dt;
            let mut ok = None;
            if let Some((m, r)) = self.newton(predicted, tn, target) {
                // reject corrections that jump further than the predictor moved
                let jump = (&m - &mu).amax();
                if jump <= 4.0 * (dt.abs() * (self.dphi_dt(&mu, t).amax() + 1.0)).max(1e-3) {
                    ok = Some((m, r));
                }
            }
            match ok {
                Some((m, r)) => {
                    mu = m;
                    res = r;
                    t = tn;
                    accepted += 1;
                    consecutive = 0;
                    h = (h * 1.5).min(self.opts.max_step);
                }
                None => {
                    consecutive += 1;
                    halvings += 1;
                    h *= 0.5;
                    if consecutive > self.opts.max_halvings {
                        return Err(Error::Continuation(format!(
                            "no acceptable step after {consecutive} halvings at t = {t}"
                        )));
                    }
                }
            }
        }
        Ok((mu, res, accepted, halvings, h))
    }
}

/// Distance of `a − b` to the nearest lattice vector, coordinatewise.
fn lattice_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            let r = d - d.round();
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// With `orbit_reps`, points are Weyl-orbit representatives and any Weyl
/// image counts as a collision; otherwise distinct points are compared
/// directly and Weyl images only detect walls.
fn min_separation(rs: &RootSystem, pts: &[Vec<f64>], orbit_reps: bool) -> f64 {
    let mut best = f64::INFINITY;
    let weyl = rs.weyl_group();
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate().skip(i) {
            for w in weyl {
                if (i == j && w.length == 0) || (i != j && !orbit_reps && w.length != 0) {
                    continue;
                }
                let wb: Vec<f64> = (0..b.len())
                    .map(|r| (0..b.len()).map(|c| w.coweight_action[r][c] as f64 * b[c]).sum())
                    .collect();
                best = best.min(lattice_distance(a, &wb));
            }
        }
    }
    best
}

fn seeds(rs: &RootSystem, level: &Level) -> Result<Vec<TrackedPoint>> {
    let reps = regular_orbit_representatives(rs, level, PointSet::Shifted)?;
    reps.iter()
        .map(|p| {
            let seed = rs.to_fundamental_alcove(&p.point.reduced_mu());
            seed_point(rs, level, seed)
        })
        .collect()
}

fn seed_point(rs: &RootSystem, level: &Level, seed: Vec<Rational64>) -> Result<TrackedPoint> {
    let target: Vec<i64> = (0..rs.rank)
        .map(|i| {
            let v = level.h_prime[i]
                .iter()
                .zip(&seed)
                .fold(Rational64::zero(), |acc, (&h, m)| acc + *m * h)
                - rs.rho[i];
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(Error::Inconsistency("seed does not solve the shifted congruence".into()))
            }
        })
        .collect::<Result<_>>()?;
    let mu = seed.iter().map(|q| linalg::q_to_f64(*q)).collect();
    Ok(TrackedPoint { seed, target, mu, residual: 0.0 })
}

fn checkpoints(t0: f64, t1: f64, spacing: f64) -> Vec<f64> {
    let n = ((t1 - t0).abs() / spacing).ceil().max(1.0) as usize;
    (1..=n).map(|k| if k == n { t1 } else { t0 + (t1 - t0) * k as f64 / n as f64 }).collect()
}

/// Advances every tracked point of `state` to `t_target`.
pub fn advance(
    rs: &RootSystem,
    level: &Level,
    state: &ContinuationState,
    t_target: f64,
    opts: &ContinuationOptions,
) -> Result<ContinuationState> {
    check_setting(rs, level)?;
    check_t(t_target)?;
    let tracker = Tracker::new(rs, level, opts.clone());
    let mut st = state.clone();
    let mut steps: Vec<f64> = vec![opts.initial_step; st.points.len()];
    for tc in checkpoints(st.t, t_target, opts.checkpoint) {
        let moved: Vec<(TrackedPoint, usize, usize, f64)> = st
            .points
            .par_iter()
            .zip(steps.par_iter())
            .map(|(p, &h0)| {
                let mu = DVector::from_vec(p.mu.clone());
                let target = DVector::from_iterator(p.target.len(), p.target.iter().map(|&x| x as f64));
                let (m, res, acc, halv, h) = tracker.track(mu, &target, st.t, tc, h0)?;
                Ok((TrackedPoint { mu: m.iter().copied().collect(), residual: res, ..p.clone() }, acc, halv, h))
            })
            .collect::<Result<_>>()?;
        st.points = Vec::with_capacity(moved.len());
        steps.clear();
        for (p, acc, halv, h) in moved {
            st.accepted_steps += acc;
            st.halvings += halv;
            st.max_residual = st.max_residual.max(p.residual);
            steps.push(h);
            st.points.push(p);
        }
        st.t = tc;
        let mus: Vec<Vec<f64>> = st.points.iter().map(|p| p.mu.clone()).collect();
        let sep = min_separation(rs, &mus, st.orbit_reps);
        st.min_separation = st.min_separation.min(sep);
        if sep < opts.collision_limit {
            return Err(Error::Continuation(format!("tracked points collide at t = {tc}")));
        }
        for p in &st.points {
            let m = DVector::from_vec(p.mu.clone());
            let j = tracker.jacobian(&m, tc);
            let cond = linalg::condition_number(&j.map(|x| Complex64::new(x, 0.0)));
            st.max_condition = st.max_condition.max(cond);
            if cond > opts.condition_limit {
                return Err(Error::Continuation(format!(
                    "Jacobian condition number {cond:.3e} at t = {tc}"
                )));
            }
        }
    }
    Ok(st)
}

/// Initial state at `t = 0`: one seed per regular Weyl orbit of `F_ρ`,
/// moved into the fundamental alcove.
pub fn initial_state(rs: &RootSystem, level: &Level) -> Result<ContinuationState> {
    check_setting(rs, level)?;
    let points = seeds(rs, level)?;
    let mus: Vec<Vec<f64>> = points.iter().map(|p| p.mu.clone()).collect();
    Ok(ContinuationState {
        t: 0.0,
        min_separation: min_separation(rs, &mus, true),
        orbit_reps: true,
        points,
        accepted_steps: 0,
        halvings: 0,
        max_residual: 0.0,
        max_condition: 0.0,
        outside_guarantee: !within_guarantee(rs, level),
    })
}

/// Continues the regular `F_ρ` representatives from `t = 0` to `t_target`
/// at `s = 0`.
pub fn continue_points(rs: &RootSystem, level: &Level, t_target: f64) -> Result<ContinuationState> {
    let st = initial_state(rs, level)?;
    advance(rs, level, &st, t_target, &ContinuationOptions::default())
}

/// States at each `t` of `grid`, continuing monotonically from `t = 0`.
pub fn continue_grid(rs: &RootSystem, level: &Level, grid: &[f64]) -> Result<Vec<ContinuationState>> {
    let opts = ContinuationOptions::default();
    let mut st = initial_state(rs, level)?;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        st = advance(rs, level, &st, t, &opts)?;
        out.push(st.clone());
    }
    Ok(out)
}

/// Tracks every regular point of `F_ρ` (not only orbit representatives).
pub fn continue_all_points(rs: &RootSystem, level: &Level, t_target: f64) -> Result<ContinuationState> {
    check_setting(rs, level)?;
    let pts = crate::levels::enumerate_f_rho(rs, level)?;
    let points = pts
        .points
        .iter()
        .filter(|p| p.is_regular)
        .map(|p| seed_point(rs, level, p.point.reduced_mu()))
        .collect::<Result<Vec<_>>>()?;
    let st = ContinuationState {
        t: 0.0,
        points,
        accepted_steps: 0,
        halvings: 0,
        max_residual: 0.0,
        max_condition: 0.0,
        min_separation: f64::INFINITY,
        outside_guarantee: !within_guarantee(rs, level),
        orbit_reps: false,
    };
    advance(rs, level, &st, t_target, &ContinuationOptions::default())
}

// ---------------------------------------------------------------------------
// Formal solves around a base point.

/// `Σ_{α>0} α·[log(1+tE_α) − log(1+tE_{−α})]`.
fn log_term(rs: &RootSystem, base: &TorusPoint, xi: &[Series], t: &Series) -> Result<SeriesVec> {
    let ring = xi[0].ring();
    let one = Series::from_constant(ring, Complex64::one());
    let mut out = series::vec_zero(ring, xi.len());
    for a in &rs.positive_roots {
        let lp = (&one + &(t * &weight_exp_series(base, a, xi))).log()?;
        let lm = (&one + &(t * &weight_exp_series(base, &neg(a), xi))).log()?;
        let d = &lp - &lm;
        for (o, &ai) in out.iter_mut().zip(a) {
            if ai != 0 {
                *o = &*o + &d.scale_re(ai as f64);
            }
        }
    }
    Ok(out)
}

fn constant_vec(ring: &std::sync::Arc<SeriesRing>, v: &[Complex64]) -> SeriesVec {
    v.iter().map(|&c| Series::from_constant(ring, c)).collect()
}

/// `J(ξ)` as a series matrix.
fn jacobian_series(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    base: &TorusPoint,
    xi: &[Series],
    t: &Series,
    s: &Series,
) -> SeriesMat {
    let ring = xi[0].ring();
    let n = xi.len();
    let one = Series::from_constant(ring, Complex64::one());
    let mut j = series::mat_from_constants(ring, &linalg::cmat_from_i(&level.h_prime));
    if s.max_abs_coeff() > 0.0 {
        let hv = hessian_series(v, base, xi);
        for r in 0..n {
            for c in 0..n {
                j[r][c] = &j[r][c] + &(s * &hv[r][c]);
            }
        }
    }
    for a in rs.all_roots() {
        let te = t * &weight_exp_series(base, &a, xi);
        // 1 + tE has nonzero constant term on the open interval
        let w = match (&one + &te).inv() {
            Ok(inv) => &te * &inv,
            Err(_) => continue,
        };
        for r in 0..n {
            for c in 0..n {
                if a[r] != 0 && a[c] != 0 {
                    j[r][c] = &j[r][c] - &w.scale_re((a[r] * a[c]) as f64);
                }
            }
        }
    }
    j
}

/// Solves `h′ξ + s·dTr_V(f e^ξ) − [L(ξ) − L(0)] = 0` for `ξ` with zero
/// constant term, where `L` is the logarithmic root sum; `t` and `s` are
/// series in a common ring and `base` already solves the `s = 0` equation at
/// the constant part of `t`.
pub fn solve_kaehler_xi(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    base: &TorusPoint,
    t: &Series,
    s: &Series,
) -> Result<SeriesVec> {
    check_setting(rs, level)?;
    let ring = t.ring().clone();
    if !s.is_compatible(t) {
        return Err(Error::RingMismatch("t and s must share a ring".into()));
    }
    let n = rs.rank;
    let zero = series::vec_zero(&ring, n);
    let l0 = log_term(rs, base, &zero, t)?;
    let consts: Vec<Complex64> = l0.iter().map(|x| x.constant_term()).collect();
    let l0c = constant_vec(&ring, &consts);

    let tc = Series::from_constant(&ring, t.constant_term());
    let sc = Series::from_constant(&ring, s.constant_term());
    let j0 = series::mat_constant_part(&jacobian_series(rs, level, v, base, &zero, &tc, &sc));
    let j0_inv = j0
        .try_inverse()
        .ok_or_else(|| Error::Inconsistency("singular Jacobian at the base point".into()))?;
    let hp = series::mat_from_constants(&ring, &linalg::cmat_from_i(&level.h_prime));

    let residual = |xi: &SeriesVec| -> Result<SeriesVec> {
        let mut r = series::mat_vec(&hp, xi);
        if s.max_abs_coeff() > 0.0 {
            for (ri, gi) in r.iter_mut().zip(gradient_series(v, base, xi)) {
                *ri = &*ri + &(s * &gi);
            }
        }
        let l = log_term(rs, base, xi, t)?;
        for ((ri, li), ci) in r.iter_mut().zip(&l).zip(&l0c) {
            *ri = &(&*ri - li) + ci;
        }
        Ok(r)
    };

    let pre = series::mat_from_constants(&ring, &j0_inv);
    let mut xi = zero;
    for _ in 0..=ring.order() + 1 {
        let r = residual(&xi)?;
        let corr = series::mat_vec(&pre, &r);
        xi = xi.iter().zip(&corr).map(|(a, b)| a - b).collect();
    }
    let r = residual(&xi)?;
    let defect = r.iter().map(|x| x.max_abs_coeff()).fold(0.0, f64::max);
    if defect > 1e-8 * (1.0 + level.f_order as f64) {
        return Err(Error::Inconsistency(format!("formal Kähler solve left residual {defect:.3e}")));
    }
    Ok(xi)
}

/// `θ_{s,t}` at the deformed point `base·e^ξ`:
/// `θ⁻¹ = |F| ∏_{all α}(1+te^α)/(1−e^α) · det(h′⁻¹J)`.
pub fn theta_st(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    base: &TorusPoint,
    xi: &[Series],
    t: &Series,
    s: &Series,
) -> Result<Series> {
    let ring = xi[0].ring();
    let one = Series::from_constant(ring, Complex64::one());
    let mut prod = one.clone();
    for a in rs.all_roots() {
        let e = weight_exp_series(base, &a, xi);
        let num = &one + &(t * &e);
        let den = (&one - &e).inv().map_err(|_| Error::SingularPoint)?;
        prod = &(&prod * &num) * &den;
    }
    let j = jacobian_series(rs, level, v, base, xi, t, s);
    let hinv = series::mat_from_constants(ring, &linalg::cmat_from_q(&level.h_prime_inverse()?));
    let det = series::mat_det(&series::mat_mul(&hinv, &j))?;
    (&prod * &det).scale_re(level.f_order as f64).inv()
}

/// `Σ_{Weyl w} ∏_{α>0} (1+te^{wα})/(1−e^{wα})`, equal to 1 at `t = 0`.
pub fn flag_factor(rs: &RootSystem, base: &TorusPoint, xi: &[Series], t: &Series) -> Result<Series> {
    let ring = xi[0].ring();
    let one = Series::from_constant(ring, Complex64::one());
    let mut total = Series::zero(ring);
    for w in rs.weyl_group() {
        let mut prod = one.clone();
        for a in &rs.positive_roots {
            let e = weight_exp_series(base, &w.act_weight(a), xi);
            let den = (&one - &e).inv().map_err(|_| Error::SingularPoint)?;
            prod = &(&prod * &(&one + &(t * &e))) * &den;
        }
        total = &total + &prod;
    }
    Ok(total)
}

/// `(1+t)^{(g−1)ℓ} Σ_f θ_{s,t}(f)^{1−g} Tr_U(f) [· flag factor]` over the
/// given base points.
#[allow(clippy::too_many_arguments)]
fn kaehler_sum(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    v: &Character,
    u: &Character,
    bases: &[TorusPoint],
    t: &Series,
    s: &Series,
    full_flag: bool,
) -> Result<Series> {
    let ring = t.ring().clone();
    let terms: Vec<Series> = bases
        .par_iter()
        .map(|b| {
            let xi = solve_kaehler_xi(rs, level, v, b, t, s)?;
            let theta = theta_st(rs, level, v, b, &xi, t, s)?;
            let mut term = &theta.powi(1 - genus as i64)? * &trace_series(u, b, &xi);
            if full_flag {
                term = &term * &flag_factor(rs, b, &xi, t)?;
            }
            Ok(term)
        })
        .collect::<Result<_>>()?;
    let sum = terms.iter().fold(Series::zero(&ring), |acc, x| &acc + x);
    let one = Series::from_constant(&ring, Complex64::one());
    let pre = (&one + t).powi((genus as i64 - 1) * rs.rank as i64)?;
    Ok(&pre * &sum)
}

#[derive(Debug, Clone)]
pub struct KaehlerIndex {
    /// Series in the variable `s`.
    pub series: Series,
    pub continuation: ContinuationState,
}

fn s_ring(s_order: usize) -> Result<(std::sync::Arc<SeriesRing>, Series)> {
    let ring = SeriesRing::new(&["s"], s_order)?;
    let s = Series::variable(&ring, "s")?;
    Ok((ring, s))
}

fn index_at(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    v: &Character,
    u: &Character,
    t: f64,
    s_order: usize,
    full_flag: bool,
) -> Result<KaehlerIndex> {
    check_setting(rs, level)?;
    check_t(t)?;
    let st = continue_points(rs, level, t)?;
    let bases: Vec<TorusPoint> = st.points.iter().map(|p| p.torus_point(rs)).collect();
    let (ring, s) = s_ring(s_order)?;
    let tt = Series::from_constant(&ring, Complex64::new(t, 0.0));
    let series = kaehler_sum(rs, level, genus, v, u, &bases, &tt, &s, full_flag)?;
    Ok(KaehlerIndex { series, continuation: st })
}

/// The Kähler index at a numeric `t ∈ (−1, 0]`, as a series in `s`.
pub fn kaehler_index(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    v: &Character,
    u: &Character,
    t: f64,
    s_order: usize,
) -> Result<KaehlerIndex> {
    index_at(rs, level, genus, v, u, t, s_order, false)
}

/// Full-flag variant: each term carries the Weyl sum of
/// `∏_{α>0}(1+te^{wα})/(1−e^{wα})`.
pub fn full_flag_index(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    v: &Character,
    u: &Character,
    t: f64,
    s_order: usize,
) -> Result<KaehlerIndex> {
    index_at(rs, level, genus, v, u, t, s_order, true)
}

/// The Kähler index as a Taylor series in `t` about `0` (with `s = 0`);
/// its coefficients are integers.
pub fn kaehler_formal_t(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    v: &Character,
    u: &Character,
    t_order: usize,
) -> Result<Series> {
    check_setting(rs, level)?;
    let ring = SeriesRing::new(&["t"], t_order)?;
    let t = Series::variable(&ring, "t")?;
    let s = Series::zero(&ring);
    let bases: Vec<TorusPoint> = seeds(rs, level)?
        .iter()
        .map(|p| TorusPoint::new(rs, p.seed.clone()))
        .collect();
    kaehler_sum(rs, level, genus, v, u, &bases, &t, &s, false)
}

/// `Σ_f θ_{0,t}(f)^{1−g} Tr_U(f_t)` without the `(1+t)` prefactor, from
/// continued points.
pub fn inner_sum(
    rs: &RootSystem,
    level: &Level,
    genus: u32,
    u: &Character,
    state: &ContinuationState,
) -> Result<f64> {
    let t = state.t;
    let mut total = 0.0;
    for p in &state.points {
        let mu: Vec<Complex64> = p.mu.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let f = point_from_mu(rs, &mu);
        let mut prod = Complex64::one();
        for a in rs.all_roots() {
            let e = f.exp_weight(&a);
            prod *= (1.0 + t * e) / (1.0 - e);
        }
        let j = chi_jacobian(rs, level, &Character::zero(), Complex64::zero(), t, &mu)?;
        let hinv = linalg::cmat_from_q(&level.h_prime_inverse()?);
        let det = (hinv * j).determinant();
        let theta_inv = prod * det * level.f_order as f64;
        let term = theta_inv.powi(genus as i32 - 1) * trace_eval(u, &f);
        total += term.re;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// The degenerate end `t = −1`.
//
// Put `t = −1 + x²`. A limit point `μ₋` solves `hμ₋ ∈ ℤ^ℓ`; the continued
// branch behaves like `μ(t) = μ₋ + Σ_k x^k ζ_k/(2π)`. If `𝔷` is the set of
// roots with `β(μ₋) ∈ ℤ`, the order-`x` equation says that `ζ₁` is the
// critical point of `½ζ·hζ − Σ_{β∈𝔷} log|β(ζ)|` in the chamber facing the
// alcove, and each later order is a linear system for `ζ_k`.

#[derive(Debug, Clone, Serialize)]
pub struct LimitPoint {
    /// Solution of `hμ ∈ ℤ^ℓ` in the closed fundamental alcove.
    pub mu: Vec<Rational64>,
    /// Positive roots integral on `mu`.
    pub singular_roots: Vec<Vec<i64>>,
    /// `ζ₁`; zero at a regular limit.
    pub tangent: Vec<f64>,
    /// `ζ_k` for `k = 2, 3, …`.
    pub higher: Vec<Vec<f64>>,
    /// `h + Σ_{β∈𝔷} β⊗β/β(ζ₁)²` (both signs of `β`), the limit of `J`.
    pub limiting_h: Vec<Vec<f64>>,
    /// `H_V` at the limit point, so that `limiting_h + s·hv` is available.
    pub hv: Vec<Vec<f64>>,
    /// Largest deviation of the recursion matrices from `limiting_h`.
    pub recursion_defect: f64,
    /// The integer vector `Φ` of the branch ending here.
    pub target: Vec<i64>,
}

fn to_dvec(v: &[i64]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|&x| x as f64))
}

fn imat_f(m: &[Vec<i64>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j] as f64)
}

/// A point in the open fundamental alcove.
fn alcove_interior(rs: &RootSystem) -> Result<Vec<Rational64>> {
    let m = rs.root_coordinates(&rs.highest_root);
    let height = m.iter().fold(Rational64::one(), |acc, x| acc + x);
    let s: linalg::QMat = rs
        .simple_roots
        .iter()
        .map(|a| a.iter().map(|&x| Rational64::from_integer(x)).collect())
        .collect();
    let inv = linalg::inverse_q(&s)
        .ok_or_else(|| Error::Inconsistency("simple roots are not a basis".into()))?;
    let b = vec![height.recip(); rs.rank];
    Ok(linalg::mat_vec_q(&inv, &b))
}

/// Minimiser of `½ζ·hζ − 2Σ_{β} log|β·ζ|` over the chamber containing `start`.
fn barrier_minimum(h: &DMatrix<f64>, roots: &[DVector<f64>], start: DVector<f64>) -> Result<DVector<f64>> {
    let value = |z: &DVector<f64>| -> f64 {
        0.5 * z.dot(&(h * z)) - 2.0 * roots.iter().map(|b| b.dot(z).abs().ln()).sum::<f64>()
    };
    let signs: Vec<f64> = roots.iter().map(|b| b.dot(&start).signum()).collect();
    let inside = |z: &DVector<f64>| roots.iter().zip(&signs).all(|(b, s)| b.dot(z) * s > 0.0);
    let mut z = start;
    for _ in 0..200 {
        let mut g = h * &z;
        let mut hess = h.clone();
        for b in roots {
            let p = b.dot(&z);
            g -= b * (2.0 / p);
            hess += (b * b.transpose()) * (2.0 / (p * p));
        }
        let step = hess
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::Inconsistency("singular barrier Hessian".into()))?;
        // squared Newton decrement; the objective is strictly convex
        let dec = g.dot(&step);
        if dec < 1e-28 || g.amax() < 1e-14 * (1.0 + h.amax()) {
            return Ok(z);
        }
        // near the minimum the predicted decrease drops below the rounding
        // of the objective, so line search is replaced by plain Newton steps
        if dec < 1e-6 {
            let cand = &z - &step;
            if inside(&cand) {
                z = cand;
                continue;
            }
        }
        let f0 = value(&z);
        let mut a = 1.0;
        loop {
            let cand = &z - &step * a;
            if inside(&cand) && value(&cand) <= f0 - 1e-4 * a * g.dot(&step) {
                z = cand;
                break;
            }
            a *= 0.5;
            if a < 1e-12 {
                // already at the minimum to working precision
                return Ok(z);
            }
        }
    }
    Err(Error::Inconsistency("barrier minimisation did not converge".into()))
}

fn monomial(ring: &std::sync::Arc<SeriesRing>, k: usize, c: Complex64) -> Result<Series> {
    Series::from_terms(ring, [(vec![k as u32], c)])
}

struct LimitExpansion<'a> {
    rs: &'a RootSystem,
    level: &'a Level,
    base: TorusPoint,
    singular: Vec<Vec<i64>>,
    ring: std::sync::Arc<SeriesRing>,
    t: Series,
}

impl LimitExpansion<'_> {
    fn xi(&self, ys: &[Vec<Complex64>]) -> Result<SeriesVec> {
        let n = self.rs.rank;
        let mut xi = series::vec_zero(&self.ring, n);
        for (k, y) in ys.iter().enumerate() {
            for i in 0..n {
                let c = y[i] * Complex64::new(0.0, 2.0 * PI);
                xi[i] = &xi[i] + &monomial(&self.ring, k + 1, c)?;
            }
        }
        Ok(xi)
    }

    /// `log(1 + tE_α) − log(1 + tE_{−α})`, with `x` cancelled from both
    /// logarithms at singular roots.
    fn log_pair(&self, a: &[i64], xi: &[Series]) -> Result<Series> {
        let one = Series::from_constant(&self.ring, Complex64::one());
        let x = Series::variable(&self.ring, "x")?;
        let side = |w: &[i64]| -> Result<Series> {
            let e = weight_exp_series(&self.base, w, xi);
            if self.singular.iter().any(|b| b == a) {
                let b = &(&one - &e).div_var("x", 1e-9)? + &(&x * &e);
                b.log()
            } else {
                (&one + &(&self.t * &e)).log()
            }
        };
        Ok(&side(a)? - &side(&neg(a))?)
    }

    /// `h′ξ − Σ_{α>0} α·logpair_α`, constant term included.
    fn residual(&self, ys: &[Vec<Complex64>]) -> Result<SeriesVec> {
        let xi = self.xi(ys)?;
        let hp = series::mat_from_constants(&self.ring, &linalg::cmat_from_i(&self.level.h_prime));
        let mut r = series::mat_vec(&hp, &xi);
        for a in &self.rs.positive_roots {
            let d = self.log_pair(a, &xi)?;
            for (ri, &ai) in r.iter_mut().zip(a) {
                if ai != 0 {
                    *ri = &*ri - &d.scale_re(ai as f64);
                }
            }
        }
        Ok(r)
    }
}

fn coefficient(r: &[Series], k: usize) -> DVector<Complex64> {
    DVector::from_iterator(r.len(), r.iter().map(|s| s.coeff(&[k as u32])))
}

fn expand_limit(
    rs: &RootSystem,
    level: &Level,
    v: &Character,
    mu: Vec<Rational64>,
    interior: &[Rational64],
    orders: usize,
) -> Result<LimitPoint> {
    let n = rs.rank;
    let h = imat_f(&level.h);
    let singular: Vec<Vec<i64>> = rs
        .positive_roots
        .iter()
        .filter(|a| crate::liealg::pair_q(a, &mu).is_integer())
        .cloned()
        .collect();
    let sing_f: Vec<DVector<f64>> = singular.iter().map(|a| to_dvec(a)).collect();

    let tangent = if singular.is_empty() {
        DVector::zeros(n)
    } else {
        let d: DVector<f64> =
            DVector::from_iterator(n, interior.iter().zip(&mu).map(|(a, b)| linalg::q_to_f64(*a - *b)));
        barrier_minimum(&h, &sing_f, d)?
    };
    let mut limiting = h.clone();
    for b in &sing_f {
        let p = b.dot(&tangent);
        limiting += (b * b.transpose()) * (2.0 / (p * p));
    }

    let ring = SeriesRing::new(&["x"], orders + 1)?;
    let x = Series::variable(&ring, "x")?;
    let t = &(&x * &x) - &Series::from_constant(&ring, Complex64::one());
    let exp = LimitExpansion { rs, level, base: TorusPoint::new(rs, mu.clone()), singular: singular.clone(), ring, t };

    let to_c = |z: &DVector<f64>| -> Vec<Complex64> { z.iter().map(|&a| Complex64::new(a / (2.0 * PI), 0.0)).collect() };
    let mut ys: Vec<Vec<Complex64>> = vec![to_c(&tangent)];

    // constant term: 2πi(h′μ − ρ − n) − Σ α·logpair = 0 fixes the branch vector n
    let r0 = exp.residual(&ys)?;
    let target: Vec<i64> = (0..n)
        .map(|i| {
            let hmu = level.h_prime[i]
                .iter()
                .zip(&mu)
                .fold(Rational64::zero(), |acc, (&hh, m)| acc + *m * hh);
            let val = linalg::q_to_f64(hmu) - rs.rho[i] as f64
                + (r0[i].constant_term() / Complex64::new(0.0, 2.0 * PI)).re;
            if (val - val.round()).abs() > 1e-8 {
                return Err(Error::Inconsistency(format!("limit point {mu:?} is not a branch end")));
            }
            Ok(val.round() as i64)
        })
        .collect::<Result<_>>()?;
    let first = coefficient(&r0, 1).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if first > 1e-8 * (1.0 + h.amax()) {
        return Err(Error::Inconsistency(format!("order-one equation left residual {first:.3e}")));
    }

    let mut defect: f64 = 0.0;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    for k in 2..=orders {
        ys.push(vec![Complex64::zero(); n]);
        let base_r = coefficient(&exp.residual(&ys)?, k);
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            ys[k - 1] = (0..n).map(|i| if i == j { Complex64::one() } else { Complex64::zero() }).collect();
            let col = coefficient(&exp.residual(&ys)?, k) - &base_r;
            m.set_column(j, &col);
        }
        for r in 0..n {
            for c in 0..n {
                defect = defect.max((m[(r, c)] / two_pi_i - limiting[(r, c)]).norm());
            }
        }
        let y = linalg::solve_c(&m, &(-base_r))?;
        ys[k - 1] = y.iter().copied().collect();
    }
    for y in &ys {
        if y.iter().any(|z| z.im.abs() > 1e-8) {
            return Err(Error::Inconsistency("limit expansion is not real".into()));
        }
    }
    let real = |y: &Vec<Complex64>| -> Vec<f64> { y.iter().map(|z| z.re * 2.0 * PI).collect() };
    let hv = trace_hessian(v, &TorusPoint::new(rs, mu.clone()));
    Ok(LimitPoint {
        tangent: tangent.iter().copied().collect(),
        higher: ys[1..].iter().map(real).collect(),
        limiting_h: (0..n).map(|i| (0..n).map(|j| limiting[(i, j)]).collect()).collect(),
        hv: hv.iter().map(|row| row.iter().map(|z| z.re).collect()).collect(),
        recursion_defect: defect,
        singular_roots: singular,
        target,
        mu,
    })
}

/// Limit points of the continuation at `t = −1` (for `s = 0`), each with
/// its expansion in `x = √(1+t)` up to order `2·s_order + 2`.
pub fn limit_t_minus1(rs: &RootSystem, level: &Level, v: &Character, s_order: usize) -> Result<Vec<LimitPoint>> {
    check_setting(rs, level)?;
    if !linalg::is_positive_definite_i(&level.h) {
        return Err(Error::Precondition("the limit t → −1 needs a positive definite level".into()));
    }
    let zero = vec![Rational64::zero(); rs.rank];
    let mut mus: Vec<Vec<Rational64>> = crate::snf::solve_congruence(&level.h, &zero)?
        .iter()
        .map(|m| rs.to_fundamental_alcove(m))
        .collect();
    mus.sort();
    mus.dedup();
    let interior = alcove_interior(rs)?;
    let orders = 2 * s_order + 2;
    mus.into_par_iter()
        .map(|mu| expand_limit(rs, level, v, mu, &interior, orders))
        .collect()
}

/// `Σ det(limiting_h)^{g−1} Tr_U(f₋)` over the limit points: the value at
/// `t = −1` of the sum that multiplies `(1+t)^{(g−1)ℓ}`.
pub fn limit_inner_sum(rs: &RootSystem, limits: &[LimitPoint], genus: u32, u: &Character) -> f64 {
    limits
        .iter()
        .map(|lp| {
            let n = lp.limiting_h.len();
            let m = DMatrix::from_fn(n, n, |i, j| lp.limiting_h[i][j]);
            let tr = trace_eval(u, &TorusPoint::new(rs, lp.mu.clone())).re;
            m.determinant().powi(genus as i32 - 1) * tr
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub mu: Vec<Rational64>,
    /// Alcoves meeting at the point: the order of its Weyl stabiliser.
    pub expected: usize,
    /// Regular points of `F_ρ` whose branch ends at the point.
    pub observed: usize,
}

/// Counts, for each limit point, the continued branches of all regular
/// points of `F_ρ` that end there, by tracking to `t = −1 + eps`.
pub fn limit_census(rs: &RootSystem, level: &Level, eps: f64) -> Result<Vec<CensusEntry>> {
    check_setting(rs, level)?;
    let zero = vec![Rational64::zero(); rs.rank];
    let all = crate::snf::solve_congruence(&level.h, &zero)?;
    let all_f: Vec<Vec<f64>> = all.iter().map(|m| m.iter().map(|q| linalg::q_to_f64(*q)).collect()).collect();
    let mut spacing = f64::INFINITY;
    for (i, a) in all_f.iter().enumerate() {
        for b in &all_f[i + 1..] {
            spacing = spacing.min(lattice_distance(a, b));
        }
    }
    let st = continue_all_points(rs, level, -1.0 + eps)?;
    let mut hits = vec![0usize; all.len()];
    for p in &st.points {
        let (idx, d) = all_f
            .iter()
            .enumerate()
            .map(|(i, m)| (i, lattice_distance(&p.mu, m)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if d > 0.25 * spacing {
            return Err(Error::Continuation(format!("branch ends {d:.3e} away from every limit point")));
        }
        hits[idx] += 1;
    }
    let mut reps: Vec<Vec<Rational64>> = all.iter().map(|m| rs.to_fundamental_alcove(m)).collect();
    reps.sort();
    reps.dedup();
    Ok(reps
        .into_iter()
        .map(|mu| {
            let p = TorusPoint::new(rs, mu.clone());
            let reduced = p.reduced_mu();
            let expected = rs.weyl_group().iter().filter(|w| p.act(rs, w).reduced_mu() == reduced).count();
            let observed = all.iter().position(|m| *m == reduced).map_or(0, |i| hits[i]);
            CensusEntry { mu, expected, observed }
        })
        .collect())
}

/// Value at `0` of the interpolating polynomial through `(xs, ys)`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

/// Index of the limit point nearest (modulo the lattice) to each tracked point.
pub fn match_limits(state: &ContinuationState, limits: &[LimitPoint]) -> Vec<usize> {
    state
        .points
        .iter()
        .map(|p| {
            limits
                .iter()
                .enumerate()
                .map(|(i, lp)| {
                    let m: Vec<f64> = lp.mu.iter().map(|q| linalg::q_to_f64(*q)).collect();
                    (i, lattice_distance(&p.mu, &m))
                })
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
                .0
        })
        .collect()
}

/// Largest entrywise gap between `J(f_t)`, extrapolated to `x = 0` from the
/// samples `t = −1 + 10^{−k}`, and `limiting_h` of the matching limit point.
pub fn hessian_limit_gap(rs: &RootSystem, level: &Level, exponents: &[i32]) -> Result<f64> {
    let limits = limit_t_minus1(rs, level, &Character::zero(), 0)?;
    let grid: Vec<f64> = exponents.iter().map(|&k| -1.0 + 10f64.powi(-k)).collect();
    let states = continue_grid(rs, level, &grid)?;
    let xs: Vec<f64> = grid.iter().map(|t| (1.0 + t).sqrt()).collect();
    let pairing = match_limits(states.last().expect("nonempty grid"), &limits);
    let n = rs.rank;
    let mut gap: f64 = 0.0;
    for (pi, &li) in pairing.iter().enumerate() {
        let mats: Vec<DMatrix<Complex64>> = states
            .iter()
            .map(|st| {
                let mu: Vec<Complex64> = st.points[pi].mu.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                chi_jacobian(rs, level, &Character::zero(), Complex64::zero(), st.t, &mu)
            })
            .collect::<Result<_>>()?;
        for r in 0..n {
            for c in 0..n {
                let ys: Vec<f64> = mats.iter().map(|m| m[(r, c)].re).collect();
                let lim = extrapolate_to_zero(&xs, &ys);
                gap = gap.max((lim - limits[li].limiting_h[r][c]).abs());
            }
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, Serialize)]
pub struct NewsteadReport {
    pub group: String,
    pub genus: u32,
    /// `(g−1)·ℓ`, the order of the `(1+t)` prefactor.
    pub vanishing_order: usize,
    /// Inner sum at `t = −1` from the limit points.
    pub limit_inner_sum: Option<f64>,
    /// `(t, inner sum)` from the continuation.
    pub samples: Vec<(f64, f64)>,
    pub extrapolated: Option<f64>,
    pub agreement: Option<f64>,
    pub nonzero_limit: bool,
    /// Poincaré polynomial of the full flag variety in `q`, coefficient list.
    pub flag_poincare: Vec<i64>,
    /// `P(1) = |W|`: the factor under the substitution `q = −t` at `t = −1`.
    pub flag_factor_at_one: i64,
    /// `P(−1)`.
    pub flag_factor_at_minus_one: i64,
    pub full_flag_transfer_inconclusive: bool,
    pub outside_guarantee: bool,
    pub errors: Vec<String>,
}

/// Sample points `t = −1 + 10^{−k}` for the extrapolation of the inner sum.
/// The sum is smooth in `x = √(1+t)` with a large linear term, so the
/// samples stay within `x ≤ 0.03` and the interpolant has degree four.
pub const INNER_SUM_DECADES: [f64; 5] = [3.0, 3.5, 4.0, 5.0, 6.0];

/// Evidence for the vanishing order of the Kähler index at `t = −1` and for
/// the transfer to the full flag variety.
pub fn newstead_report(rs: &RootSystem, level: &Level, genus: u32, u: &Character) -> Result<NewsteadReport> {
    check_setting(rs, level)?;
    let flag_poincare = crate::liealg::poincare_polynomial(rs, &[])?;
    let at_one = crate::liealg::eval_poly(&flag_poincare, 1);
    let at_minus_one = crate::liealg::eval_poly(&flag_poincare, -1);
    let mut report = NewsteadReport {
        group: rs.type_label.clone(),
        genus,
        vanishing_order: genus.saturating_sub(1) as usize * rs.rank,
        limit_inner_sum: None,
        samples: Vec::new(),
        extrapolated: None,
        agreement: None,
        nonzero_limit: false,
        flag_poincare,
        flag_factor_at_one: at_one,
        flag_factor_at_minus_one: at_minus_one,
        full_flag_transfer_inconclusive: at_minus_one == 0,
        outside_guarantee: !within_guarantee(rs, level),
        errors: Vec::new(),
    };
    match limit_t_minus1(rs, level, &Character::zero(), 0) {
        Ok(limits) => {
            let s = limit_inner_sum(rs, &limits, genus, u);
            report.limit_inner_sum = Some(s);
            report.nonzero_limit = s.abs() > 1e-9;
        }
        Err(e) => report.errors.push(format!("limit points: {e}")),
    }
    let grid: Vec<f64> = INNER_SUM_DECADES.iter().map(|&k| -1.0 + 10f64.powf(-k)).collect();
    match continue_grid(rs, level, &grid) {
        Ok(states) => {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for st in &states {
                match inner_sum(rs, level, genus, u, st) {
                    Ok(v) => {
                        report.samples.push((st.t, v));
                        xs.push((1.0 + st.t).sqrt());
                        ys.push(v);
                    }
                    Err(e) => report.errors.push(format!("inner sum at t = {}: {e}", st.t)),
                }
            }
            if xs.len() == grid.len() {
                let ex = extrapolate_to_zero(&xs, &ys);
                report.extrapolated = Some(ex);
                report.agreement = report.limit_inner_sum.map(|l| (l - ex).abs());
            }
        }
        Err(e) => report.errors.push(format!("continuation: {e}")),
    }
    Ok(report)
}
