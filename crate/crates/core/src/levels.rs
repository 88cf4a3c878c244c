//! Levels, the finite Verlinde point sets, classical Verlinde numbers and
//! an independent fusion-ring count.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::charfun::irred_character;
use crate::linalg::{self, IMat};
use crate::dd::DoubleDouble;
use crate::liealg::{pair_q, weyl_denominator_sq, RootSystem, TorusPoint};
use crate::snf::solve_congruence;
use crate::{Error, Result};

/// `c(ξ, ξ) = Σ_{α>0} α(ξ)²` on coweight coordinates.
pub fn c_form(rs: &RootSystem) -> IMat {
    let n = rs.rank;
    let mut c = vec![vec![0i64; n]; n];
    for a in &rs.positive_roots {
        for i in 0..n {
            for j in 0..n {
                c[i][j] += a[i] * a[j];
            }
        }
    }
    c
}

/// An integer symmetric form `h` on coweights together with `h′ = h + c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    pub h: IMat,
    pub h_prime: IMat,
    /// `|det h′|`, the size of the Verlinde point set.
    pub f_order: i64,
}

impl Level {
    pub fn new(rs: &RootSystem, h: IMat) -> Result<Self> {
        let n = rs.rank;
        if h.len() != n || h.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("level matrix must be {n}x{n}")));
        }
        if (0..n).any(|i| (0..n).any(|j| h[i][j] != h[j][i])) {
            return Err(Error::InvalidInput("level matrix must be symmetric".into()));
        }
        let c = c_form(rs);
        let h_prime: IMat = (0..n)
            .map(|i| (0..n).map(|j| h[i][j] + c[i][j]).collect())
            .collect();
        let f_order = linalg::det_i(&h_prime).abs();
        Ok(Level { h, h_prime, f_order })
    }

    /// `h + c ≻ 0`.
    pub fn is_admissible(&self) -> bool {
        linalg::is_positive_definite_i(&self.h_prime)
    }

    /// `h − c ≻ 0`, the stronger hypothesis used for the Kähler continuation.
    pub fn dominates_c(&self, rs: &RootSystem) -> bool {
        let c = c_form(rs);
        let n = self.h.len();
        let d: IMat = (0..n)
            .map(|i| (0..n).map(|j| self.h[i][j] - c[i][j]).collect())
            .collect();
        linalg::is_positive_definite_i(&d)
    }

    pub fn h_prime_inverse(&self) -> Result<linalg::QMat> {
        linalg::inverse_q(&linalg::to_rational(&self.h_prime))
            .ok_or_else(|| Error::Precondition("shifted level is singular".into()))
    }
}

/// `h = k · basic_form`.
pub fn canonical_level(rs: &RootSystem, k: i64) -> Result<Level> {
    if rs.simple_rank == 0 {
        return Err(Error::InvalidInput(
            "a scalar level needs a simple factor; pass a level matrix for tori".into(),
        ));
    }
    let h = rs
        .basic_form
        .iter()
        .map(|row| row.iter().map(|x| x * k).collect())
        .collect();
    Level::new(rs, h)
}

#[derive(Debug, Clone)]
pub struct VerlindePoint {
    pub point: TorusPoint,
    /// `Δ(f)²/|F|`.
    pub theta0: f64,
    /// Number of distinct points in the Weyl orbit.
    pub orbit_size: usize,
    pub is_regular: bool,
}

/// Which congruence the point set solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointSet {
    /// `ι(μ)h′ ≡ ρ`.
    Shifted,
    /// `ι(μ)h′ ≡ 0`.
    Kernel,
}

#[derive(Debug, Clone)]
pub struct VerlindePoints {
    pub points: Vec<VerlindePoint>,
    pub f_order: i64,
}

impl VerlindePoint {
    /// Reduced coweights of the Weyl orbit, sorted.
    pub fn orbit_of(rs: &RootSystem, f: &TorusPoint) -> Vec<Vec<Rational64>> {
        let mut v: Vec<Vec<Rational64>> = rs
            .weyl_group()
            .iter()
            .map(|w| f.act(rs, w).reduced_mu())
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn enumerate_points(rs: &RootSystem, level: &Level, which: PointSet) -> Result<VerlindePoints> {
    if !level.is_admissible() {
        return Err(Error::Inadmissible);
    }
    let target: Vec<Rational64> = match which {
        PointSet::Shifted => rs.rho.iter().map(|&x| Rational64::from_integer(x)).collect(),
        PointSet::Kernel => vec![Rational64::zero(); rs.rank],
    };
    let sols = solve_congruence(&level.h_prime, &target)?;
    if sols.len() as i64 != level.f_order {
        return Err(Error::Inconsistency(format!(
            "{} lattice solutions but |det h'| = {}",
            sols.len(),
            level.f_order
        )));
    }
    let norm = level.f_order as f64;
    // Each orbit is computed once and its size shared by all its members.
    let mut orbit_sizes: HashMap<Vec<Rational64>, usize> = HashMap::new();
    let points = sols
        .into_iter()
        .map(|mu| {
            let point = TorusPoint::new(rs, mu);
            let d2 = weyl_denominator_sq(rs, &point);
            let orbit_size = match orbit_sizes.get(&point.reduced_mu()) {
                Some(&n) => n,
                None => {
                    let orbit = VerlindePoint::orbit_of(rs, &point);
                    let n = orbit.len();
                    orbit_sizes.extend(orbit.into_iter().map(|m| (m, n)));
                    n
                }
            };
            VerlindePoint {
                theta0: d2.re / norm,
                orbit_size,
                is_regular: point.is_regular(),
                point,
            }
        })
        .collect();
    Ok(VerlindePoints { points, f_order: level.f_order })
}

pub fn enumerate_f_rho(rs: &RootSystem, level: &Level) -> Result<VerlindePoints> {
    enumerate_points(rs, level, PointSet::Shifted)
}

pub fn enumerate_f(rs: &RootSystem, level: &Level) -> Result<VerlindePoints> {
    enumerate_points(rs, level, PointSet::Kernel)
}

/// Regular orbit representatives of the chosen point set.
pub fn regular_orbit_representatives(
    rs: &RootSystem,
    level: &Level,
    which: PointSet,
) -> Result<Vec<VerlindePoint>> {
    let pts = enumerate_points(rs, level, which)?;
    let mut seen: HashSet<Vec<Rational64>> = HashSet::new();
    let mut reps = Vec::new();
    for p in pts.points.into_iter().filter(|p| p.is_regular) {
        let mu = p.point.reduced_mu();
        if seen.contains(&mu) {
            continue;
        }
        seen.extend(VerlindePoint::orbit_of(rs, &p.point));
        reps.push(p);
    }
    Ok(reps)
}

/// `Σ_{f ∈ F_ρ^reg/W} θ(f)^{1−g}`.
///
/// The sum is accumulated in double-double precision from the exact
/// rational coordinates of the points, so integer values up to `2^53` come
/// out exact rather than merely close.
pub fn verlinde_number(rs: &RootSystem, level: &Level, genus: u32) -> Result<f64> {
    let reps = regular_orbit_representatives(rs, level, PointSet::Shifted)?;
    verlinde_sum(rs, &reps, level.f_order, genus)
}

pub(crate) fn verlinde_sum(rs: &RootSystem, reps: &[VerlindePoint], f_order: i64, genus: u32) -> Result<f64> {
    let exponent = 1 - genus as i32;
    let norm = DoubleDouble::from_f64(f_order as f64);
    let four = DoubleDouble::from_f64(4.0);
    let mut total = DoubleDouble::ZERO;
    for p in reps {
        if p.point.correction.is_some() {
            return Err(Error::Precondition("Verlinde points carry no correction".into()));
        }
        let theta = rs.positive_roots.iter().fold(DoubleDouble::ONE, |acc, a| {
            let s = DoubleDouble::sin_pi(pair_q(a, &p.point.mu));
            acc * four * s * s
        }) / norm;
        if theta.to_f64() <= 0.0 {
            return Err(Error::Inconsistency(format!("nonpositive theta {} at a regular point", theta.to_f64())));
        }
        total = total + theta.powi(exponent);
    }
    Ok(total.to_f64())
}

/// Level-`k` integrable highest weights of the simple factor.
pub fn integrable_weights(rs: &RootSystem, k: i64) -> Vec<Vec<i64>> {
    let s = rs.simple_rank;
    let mut out = Vec::new();
    let mut cur = vec![0i64; s];
    fn rec(rs: &RootSystem, k: i64, i: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let used: i64 = cur[..i].iter().zip(&rs.highest_coroot).map(|(a, b)| a * b).sum();
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        let mut v = 0;
        while used + v * rs.highest_coroot[i] <= k {
            cur[i] = v;
            rec(rs, k, i + 1, cur, out);
            v += 1;
        }
        cur[i] = 0;
    }
    rec(rs, k, 0, &mut cur, &mut out);
    out
}

/// Kac–Walton fusion product `a ⊗_k b` as a map highest weight → multiplicity.
pub fn fusion_product(rs: &RootSystem, k: i64, a: &[i64], b: &[i64]) -> Result<BTreeMap<Vec<i64>, i64>> {
    let shifted_level = k + rs.dual_coxeter;
    let vb = irred_character(rs, b)?;
    let mut out: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    for (nu, &m) in vb.iter() {
        let mut lam: Vec<i64> = (0..rs.rank).map(|i| a[i] + nu[i] + rs.rho[i]).collect();
        let mut sign = m;
        let landed = loop {
            if let Some(i) = (0..rs.simple_rank).find(|&i| lam[i] <= 0) {
                if lam[i] == 0 {
                    break false;
                }
                let c = lam[i];
                for (x, r) in lam.iter_mut().zip(&rs.simple_roots[i]) {
                    *x -= c * r;
                }
                sign = -sign;
                continue;
            }
            let th: i64 = lam.iter().zip(&rs.highest_coroot).map(|(x, y)| x * y).sum();
            if th >= shifted_level {
                if th == shifted_level {
                    break false;
                }
                let c = th - shifted_level;
                for (x, r) in lam.iter_mut().zip(&rs.highest_root) {
                    *x -= c * r;
                }
                sign = -sign;
                continue;
            }
            break true;
        };
        if landed {
            let top: Vec<i64> = lam.iter().zip(&rs.rho).map(|(x, r)| x - r).collect();
            *out.entry(top).or_insert(0) += sign;
        }
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

/// `−w₀ λ`.
pub fn dual_weight(rs: &RootSystem, lambda: &[i64]) -> Vec<i64> {
    let neg: Vec<i64> = lambda.iter().map(|x| -x).collect();
    rs.to_dominant(&neg).0
}

/// Genus-`g` partition function of the level-`k` fusion ring, glued from
/// the handle operator `Σ_a N_a N_{a*}`; at genus 2 this is the theta-graph
/// sum `Σ_{a,b,c} N_{abc} N_{a*b*c*}`.
pub fn fusion_gluing_oracle(rs: &RootSystem, k: i64, genus: u32) -> Result<i64> {
    if rs.simple_rank == 0 || rs.torus_rank > 0 {
        return Err(Error::UnsupportedType(format!(
            "fusion oracle needs a simple group, got {}",
            rs.type_label
        )));
    }
    if k < 0 {
        return Err(Error::InvalidInput(format!("fusion level must be >= 0, got {k}")));
    }
    if genus == 0 {
        return Ok(1);
    }
    let weights = integrable_weights(rs, k);
    let n = weights.len();
    let pos = |w: &Vec<i64>| weights.iter().position(|x| x == w);
    // fusion[a][b][c] = N_{ab}^c
    let mut fusion = vec![vec![vec![0i64; n]; n]; n];
    for (ia, a) in weights.iter().enumerate() {
        for (ib, b) in weights.iter().enumerate() {
            for (c, m) in fusion_product(rs, k, a, b)? {
                let ic = pos(&c).ok_or_else(|| {
                    Error::Inconsistency(format!("fusion product left the alcove: {c:?}"))
                })?;
                if m < 0 {
                    return Err(Error::Inconsistency("negative fusion coefficient".into()));
                }
                fusion[ia][ib][ic] = m;
            }
        }
    }
    let dual: Vec<usize> = weights
        .iter()
        .map(|w| pos(&dual_weight(rs, w)).expect("dual weight is integrable"))
        .collect();
    let mut handle = vec![vec![0i64; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    handle[b][d] += fusion[a][b][c] * fusion[dual[a]][c][d];
                }
            }
        }
    }
    let mut power = linalg::identity_i(n);
    for _ in 1..genus {
        power = linalg::mat_mul_i(&power, &handle);
    }
    Ok((0..n).map(|i| power[i][i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{pair_q, root_system_from_label};

    fn a1() -> RootSystem {
        root_system_from_label("A1").unwrap()
    }

    #[test]
    fn c_form_examples() {
        assert_eq!(c_form(&a1()), vec![vec![4]]);
        let t = root_system_from_label("T2").unwrap();
        assert_eq!(c_form(&t), vec![vec![0, 0], vec![0, 0]]);
        for label in ["A1", "A2", "A3", "A4", "C2", "G2"] {
            let rs = root_system_from_label(label).unwrap();
            let c = c_form(&rs);
            for i in 0..rs.rank {
                for j in 0..rs.rank {
                    assert_eq!(c[i][j], rs.dual_coxeter * rs.basic_form[i][j], "{label}");
                }
            }
        }
    }

    #[test]
    fn canonical_levels() {
        let rs = a1();
        assert_eq!(canonical_level(&rs, 1).unwrap().h, vec![vec![2]]);
        assert!(canonical_level(&rs, 0).unwrap().is_admissible());
        let bad = canonical_level(&rs, -3).unwrap();
        assert_eq!(bad.h_prime, vec![vec![-2]]);
        assert!(!bad.is_admissible());
        assert!(matches!(enumerate_f_rho(&rs, &bad), Err(Error::Inadmissible)));
        assert!(Level::new(&rs, vec![vec![1, 2]]).is_err());
        assert!(canonical_level(&root_system_from_label("T1").unwrap(), 1).is_err());
    }

    #[test]
    fn a1_point_sets() {
        let rs = a1();
        let lvl = canonical_level(&rs, 1).unwrap();
        let pts = enumerate_f_rho(&rs, &lvl).unwrap();
        assert_eq!(pts.f_order, 6);
        let regular: Vec<Rational64> = pts
            .points
            .iter()
            .filter(|p| p.is_regular)
            .map(|p| p.point.mu[0])
            .collect();
        // ζ = e^{2πiμ} = e^{πij/3} for j = 1, 2, 4, 5
        assert_eq!(
            regular,
            [1, 2, 4, 5].iter().map(|&j| Rational64::new(j, 6)).collect::<Vec<_>>()
        );
        assert_eq!(regular_orbit_representatives(&rs, &lvl, PointSet::Shifted).unwrap().len(), 2);
        let lvl2 = canonical_level(&rs, 2).unwrap();
        assert_eq!(enumerate_f_rho(&rs, &lvl2).unwrap().f_order, 8);
        assert_eq!(regular_orbit_representatives(&rs, &lvl2, PointSet::Shifted).unwrap().len(), 3);
        let f = enumerate_f(&rs, &lvl).unwrap();
        let a: Vec<_> = f.points.iter().map(|p| p.point.mu.clone()).collect();
        let b: Vec<_> = pts.points.iter().map(|p| p.point.mu.clone()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn torus_point_set() {
        let rs = root_system_from_label("T1").unwrap();
        let lvl = Level::new(&rs, vec![vec![5]]).unwrap();
        let pts = enumerate_f_rho(&rs, &lvl).unwrap();
        assert_eq!(pts.points.len(), 5);
        assert!(pts.points.iter().all(|p| p.is_regular && (p.theta0 - 0.2).abs() < 1e-12));
    }

    #[test]
    fn verlinde_examples() {
        let rs = a1();
        let v = |k, g| verlinde_number(&rs, &canonical_level(&rs, k).unwrap(), g).unwrap();
        assert!((v(1, 2) - 4.0).abs() < 1e-9);
        assert!((v(2, 2) - 10.0).abs() < 1e-9);
        assert!((v(3, 1) - 4.0).abs() < 1e-9);
        for k in 1..=6 {
            assert!((v(k, 0) - 1.0).abs() < 1e-9);
        }
        let a2 = root_system_from_label("A2").unwrap();
        let v = verlinde_number(&a2, &canonical_level(&a2, 1).unwrap(), 2).unwrap();
        assert!((v - 9.0).abs() < 1e-9);
    }

    #[test]
    fn fusion_oracle_examples() {
        let rs = a1();
        assert_eq!(fusion_gluing_oracle(&rs, 1, 2).unwrap(), 4);
        assert_eq!(fusion_gluing_oracle(&rs, 2, 2).unwrap(), 10);
        assert_eq!(fusion_gluing_oracle(&rs, 3, 1).unwrap(), 4);
        let a2 = root_system_from_label("A2").unwrap();
        assert_eq!(fusion_gluing_oracle(&a2, 1, 2).unwrap(), 9);
        assert_eq!(dual_weight(&a2, &[1, 0]), vec![0, 1]);
        assert!(fusion_gluing_oracle(&root_system_from_label("T1").unwrap(), 1, 2).is_err());
        assert!(fusion_gluing_oracle(&rs, -1, 2).is_err());
        // SU(2)_1: ω ⊗ ω = 0
        assert_eq!(
            fusion_product(&rs, 1, &[1], &[1]).unwrap(),
            BTreeMap::from([(vec![0], 1)])
        );
    }

    #[test]
    fn point_set_invariants() {
        for (label, kmax) in [("A1", 4), ("A2", 3), ("C2", 2), ("G2", 2)] {
            let rs = root_system_from_label(label).unwrap();
            for k in 0..=kmax {
                let lvl = canonical_level(&rs, k).unwrap();
                let pts = enumerate_f_rho(&rs, &lvl).unwrap();
                assert_eq!(pts.points.len() as i64, linalg::det_i(&lvl.h_prime).abs());
                let set: HashSet<Vec<Rational64>> =
                    pts.points.iter().map(|p| p.point.reduced_mu()).collect();
                let mut orbit_total = 0;
                let mut covered: HashSet<Vec<Rational64>> = HashSet::new();
                for p in &pts.points {
                    assert_eq!(rs.weyl_order() % p.orbit_size, 0);
                    assert_eq!(p.is_regular, rs.is_regular_exact(&p.point.mu));
                    for w in rs.weyl_group() {
                        assert!(set.contains(&p.point.act(&rs, w).reduced_mu()));
                    }
                    if covered.insert(p.point.reduced_mu()) {
                        let orbit = VerlindePoint::orbit_of(&rs, &p.point);
                        orbit_total += orbit.len();
                        covered.extend(orbit);
                    }
                    // γ(ι(μ)h′) − ρ(γ) ∈ ℤ for every coroot γ
                    let hmu: Vec<Rational64> = lvl
                        .h_prime
                        .iter()
                        .map(|row| pair_q(row, &p.point.mu))
                        .collect();
                    for g in &rs.coroots {
                        let v = g.iter().zip(&hmu).fold(Rational64::zero(), |a, (&x, y)| a + *y * x)
                            - Rational64::from_integer(g.iter().zip(&rs.rho).map(|(a, b)| a * b).sum());
                        assert!(v.is_integer());
                    }
                }
                assert_eq!(orbit_total as i64, pts.f_order);
                for g in 0..=4 {
                    let v = verlinde_number(&rs, &lvl, g).unwrap();
                    assert!((v - v.round()).abs() < 1e-9, "{label} k={k} g={g}: {v}");
                    let kernel = regular_orbit_representatives(&rs, &lvl, PointSet::Kernel).unwrap();
                    assert!((verlinde_sum(&rs, &kernel, lvl.f_order, g).unwrap() - v).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fusion_oracle_matches_formula_beyond_genus_two() {
        for (label, kmax) in [("A1", 4), ("A2", 2), ("C2", 2), ("G2", 2)] {
            let rs = root_system_from_label(label).unwrap();
            for k in 0..=kmax {
                let lvl = canonical_level(&rs, k).unwrap();
                for g in 1..=3 {
                    let v = verlinde_number(&rs, &lvl, g).unwrap();
                    let o = fusion_gluing_oracle(&rs, k, g).unwrap();
                    assert!((v - o as f64).abs() < 1e-8, "{label} k={k} g={g}: {v} vs {o}");
                }
            }
        }
    }
}
