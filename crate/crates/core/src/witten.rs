//! Large-level asymptotics for `SL(2)`.
//!
//! The deformed labels `k_t` solve `k_t + t·φ′(ζ_t) = k` with
//! `ζ_t = exp(πi k_t/(l+2))`, where `φ′(u) = (2πi)⁻¹ Σ n φ_n uⁿ` is the
//! derivative of `φ` along the circle. This is the logarithm of
//! `ζ_t^{2l+4}·exp(t Σ n φ_n ζ_tⁿ) = 1`, the equation of the deformed points,
//! and keeps `k_t` real for symmetric `φ`.
//!
//! The limit of the scaled index is
//! `2(l+2)^d Σ_{k≥1} [1 + tφ̈(ζ_t)/(2l+4)]^{g−1} (√2·πk_t)^{2−2g}`, valid
//! modulo `t^{(l+2)/j}` for `φ` of spin `2j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::series::{Series, SeriesRing};
use crate::{Error, Result};

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Checks that `φ` is symmetric with even exponents and returns the spin
/// `j = max|n|/2`.
fn check_phi(phi: &BTreeMap<i64, i64>) -> Result<i64> {
    for (&n, &m) in phi {
        if n % 2 != 0 && m != 0 {
            return Err(Error::InvalidInput(format!(
                "φ must have even spin; exponent {n} is odd"
            )));
        }
        if phi.get(&-n).copied().unwrap_or(0) != m {
            return Err(Error::InvalidInput(format!(
                "φ must be symmetric under u ↦ u⁻¹ (exponent {n})"
            )));
        }
    }
    Ok(phi.iter().filter(|(_, &m)| m != 0).map(|(&n, _)| n.abs() / 2).max().unwrap_or(0))
}

/// `Σ φ_n n^p ζ_tⁿ` with `ζ_t = exp(πi k_t/(l+2))`.
fn phi_moment(phi: &BTreeMap<i64, i64>, l: i64, kt: &Series, p: u32) -> Series {
    let ring = kt.ring();
    let scale = Complex64::new(0.0, PI / (l + 2) as f64);
    phi.iter().fold(Series::zero(ring), |acc, (&n, &m)| {
        let z = kt.scale(scale * n as f64).exp();
        &acc + &z.scale_re((m * n.pow(p)) as f64)
    })
}

/// `k_t = k + k₁t + …` in the ring `t` of the given order.
pub fn solve_kt(l: i64, phi: &BTreeMap<i64, i64>, k: i64, order: usize) -> Result<Series> {
    if l < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {l}")));
    }
    if k < 1 {
        return Err(Error::InvalidInput(format!("k must be >= 1, got {k}")));
    }
    check_phi(phi)?;
    let ring = SeriesRing::new(&["t"], order)?;
    let t = Series::variable(&ring, "t")?;
    let base = Series::from_constant(&ring, Complex64::new(k as f64, 0.0));
    let angular = Complex64::new(0.0, 2.0 * PI).inv();
    let mut kt = base.clone();
    for _ in 0..=order {
        let d = phi_moment(phi, l, &kt, 1).scale(angular);
        kt = &base - &(&t * &d);
    }
    Ok(kt)
}

#[derive(Debug, Clone)]
pub struct WittenSum {
    /// Partial sum over `k ≤ terms`, as a series in `t`.
    pub series: Series,
    /// Bound on the omitted tail of the `t⁰` coefficient.
    pub tail_bound: f64,
    pub terms: usize,
    /// `d = 3(g−1)`.
    pub dimension: u32,
}

/// `2(l+2)^d (2π²)^{1−g} Σ_{k>K} k^{2−2g} ≤ 2(l+2)^d (2π²)^{1−g} K^{3−2g}/(2g−3)`.
pub fn tail_bound(l: i64, genus: u32, terms: usize) -> f64 {
    let g = genus as f64;
    let d = 3 * (genus as i32 - 1);
    2.0 * ((l + 2) as f64).powi(d) * (2.0 * PI * PI).powf(1.0 - g) * (terms as f64).powf(3.0 - 2.0 * g)
        / (2.0 * g - 3.0)
}

pub fn witten_sum(
    l: i64,
    phi: &BTreeMap<i64, i64>,
    genus: u32,
    t_order: usize,
    terms: usize,
) -> Result<WittenSum> {
    if genus < 2 {
        return Err(Error::InvalidInput(format!("genus must be >= 2, got {genus}")));
    }
    if l < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {l}")));
    }
    if terms == 0 {
        return Err(Error::InvalidInput("at least one term is needed".into()));
    }
    let j = check_phi(phi)?;
    if j > 0 && (t_order as i64) * j >= l + 2 {
        return Err(Error::InvalidInput(format!(
            "order {t_order} exceeds the truncation: only orders below (l+2)/j = {}/{j} are valid",
            l + 2
        )));
    }
    let d = 3 * (genus - 1);
    let shifted = (2 * l + 4) as f64;
    let period = (2 * l + 4) as usize;
    let ring = SeriesRing::new(&["t"], t_order)?;
    let t = Series::variable(&ring, "t")?;
    let one = Series::from_constant(&ring, Complex64::new(1.0, 0.0));

    // k_t − k and the bracket depend on k only modulo 2l+4
    let per_class: Vec<(Series, Series)> = (1..=period as i64)
        .map(|k| {
            let kt = solve_kt(l, phi, k, t_order)?;
            let shift = &kt - &Series::from_constant(&ring, Complex64::new(k as f64, 0.0));
            let bracket = &one + &(&t * &phi_moment(phi, l, &kt, 2)).scale_re(1.0 / shifted);
            Ok((shift, bracket.powi(genus as i64 - 1)?))
        })
        .collect::<Result<_>>()?;

    let term = |k: usize| -> Result<Series> {
        let (shift, bracket) = &per_class[(k - 1) % period];
        let kt = &Series::from_constant(&ring, Complex64::new(k as f64, 0.0)) + shift;
        let sq = (&kt * &kt).scale_re(2.0 * PI * PI);
        Ok(bracket * &sq.powi(1 - genus as i64)?)
    };
    // smallest terms first
    let mut acc = Series::zero(&ring);
    for k in (1..=terms).rev() {
        acc = &acc + &term(k)?;
    }
    let prefactor = 2.0 * ((l + 2) as f64).powi(d as i32);
    Ok(WittenSum {
        series: acc.scale_re(prefactor),
        tail_bound: tail_bound(l, genus, terms),
        terms,
        dimension: d,
    })
}

/// `ζ(s)` for real `s > 1`, by Euler–Maclaurin after 64 terms.
pub fn zeta(s: f64) -> f64 {
    let n = 64usize;
    let mut acc = CompensatedSum::default();
    for k in (1..n).rev() {
        acc.add((k as f64).powf(-s));
    }
    let nf = n as f64;
    // tail from n on: ∫ + f(n)/2 − Σ B_{2m}/(2m)! f^{(2m−1)}(n)
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    tail += s / 12.0 * nf.powf(-s - 1.0);
    tail -= s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0);
    tail += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * nf.powf(-s - 5.0);
    acc.add(tail);
    acc.value()
}

/// The `t = 0` value of the limit, `2(l+2)^d (2π²)^{1−g} ζ(2g−2)`.
pub fn witten_limit(l: i64, genus: u32) -> Result<f64> {
    if genus < 2 {
        return Err(Error::InvalidInput(format!("genus must be >= 2, got {genus}")));
    }
    let g = genus as f64;
    let d = 3 * (genus as i32 - 1);
    Ok(2.0 * ((l + 2) as f64).powi(d) * (2.0 * PI * PI).powf(1.0 - g) * zeta(2.0 * g - 2.0))
}

/// `SL(2)` Verlinde number at level `K`:
/// `((K+2)/2)^{g−1} Σ_{j=1}^{K+1} sin(πj/(K+2))^{2−2g}`, summed with
/// compensation and rounded.
pub fn su2_verlinde(level: i64, genus: u32) -> Result<f64> {
    if level < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {level}")));
    }
    let m = (level + 2) as f64;
    let mut acc = CompensatedSum::default();
    let mut terms: Vec<f64> = (1..=level + 1)
        .map(|j| (PI * j as f64 / m).sin().powi(2 - 2 * genus as i32))
        .collect();
    // the large terms sit at both ends of the range; add them last
    terms.sort_by(|a, b| a.total_cmp(b));
    for x in terms {
        acc.add(x);
    }
    let v = (m / 2.0).powi(genus as i32 - 1) * acc.value();
    if !v.is_finite() {
        return Err(Error::Overflow("Verlinde number exceeds f64 range"));
    }
    Ok(v.round())
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    pub n: i64,
    pub level: i64,
    pub value: f64,
    /// `value / n^d`.
    pub scaled: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRun {
    pub l: i64,
    pub genus: u32,
    pub dimension: u32,
    pub target: f64,
    pub rows: Vec<AsymptoticRow>,
    /// Least-squares slope `p` in `deviation ≈ C·n^{−p}`.
    pub empirical_rate: Option<f64>,
}

/// Verlinde numbers at level `n(l+2) − 2`, scaled by `n^{3(g−1)}`, against
/// the `t = 0` limit.
pub fn asymptotic_check(l: i64, genus: u32, n_values: &[i64]) -> Result<AsymptoticRun> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n values must be strictly increasing".into()));
    }
    if n_values.first().is_some_and(|&n| n < 1) {
        return Err(Error::InvalidInput("n values must be positive".into()));
    }
    let target = witten_limit(l, genus)?;
    let d = 3 * (genus - 1);
    let rows: Vec<AsymptoticRow> = n_values
        .par_iter()
        .map(|&n| {
            let level = n * (l + 2) - 2;
            let value = su2_verlinde(level, genus)?;
            let scaled = value / (n as f64).powi(d as i32);
            Ok(AsymptoticRow { n, level, value, scaled, deviation: (scaled - target).abs() })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.deviation > 0.0)
        .map(|r| ((r.n as f64).ln(), r.deviation.ln()))
        .collect();
    let empirical_rate = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -num / den
    });
    Ok(AsymptoticRun { l, genus, dimension: d, target, rows, empirical_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::{canonical_level, verlinde_number};
    use crate::liealg::root_system_from_label;

    fn adjoint() -> BTreeMap<i64, i64> {
        BTreeMap::from([(-2, 1), (0, 1), (2, 1)])
    }

    #[test]
    fn kt_leading_terms() {
        let phi = adjoint();
        let kt = solve_kt(2, &phi, 3, 3).unwrap();
        assert!((kt.constant_term() - 3.0).norm() < 1e-15);
        // k₁ = −φ′(e^{iπk/(l+2)}) = −(2/π)·sin(2πk/(l+2))·… for the adjoint
        let theta = PI * 3.0 / 4.0;
        let k1 = -(4.0 * (2.0 * theta).sin()) / (2.0 * PI);
        assert!((kt.coeff(&[1]) - k1).norm() < 1e-14);
        assert!(kt.coeffs().iter().all(|c| c.im.abs() < 1e-14));
    }

    #[test]
    fn kt_periodicity() {
        let phi = BTreeMap::from([(-4, 2), (-2, 1), (0, 3), (2, 1), (4, 2)]);
        for k in 1..6 {
            let a = solve_kt(3, &phi, k, 4).unwrap();
            let b = solve_kt(3, &phi, k + 10, 4).unwrap();
            for i in 0..=4u32 {
                let shift = if i == 0 { 10.0 } else { 0.0 };
                let d = (b.coeff(&[i]) - a.coeff(&[i]) - shift).norm();
                // phases of size ~40 rad cost a few digits
                assert!(d < 1e-10, "k={k} t^{i}: {d}");
            }
        }
    }

    #[test]
    fn constant_limits() {
        let w = witten_sum(0, &BTreeMap::new(), 2, 0, 20000).unwrap();
        let c = w.series.constant_term().re;
        assert!(c < 4.0 / 3.0 && 4.0 / 3.0 - c <= w.tail_bound);
        assert!((witten_limit(0, 2).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((witten_limit(2, 2).unwrap() - 32.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn tail_bound_brackets_partial_sums() {
        for g in [2u32, 3] {
            let short = witten_sum(1, &BTreeMap::new(), g, 0, 50).unwrap();
            let long = witten_sum(1, &BTreeMap::new(), g, 0, 5000).unwrap();
            let (a, b) = (short.series.constant_term().re, long.series.constant_term().re);
            assert!(a <= b && b - a <= short.tail_bound);
            let lim = witten_limit(1, g).unwrap();
            assert!(lim - b <= long.tail_bound && lim >= b);
        }
    }

    #[test]
    fn truncation_rule_and_spin() {
        assert!(witten_sum(2, &adjoint(), 2, 3, 10).is_ok());
        assert!(witten_sum(2, &adjoint(), 2, 4, 10).is_err());
        assert!(witten_sum(2, &BTreeMap::from([(-1, 1), (1, 1)]), 2, 1, 10).is_err());
        let w = witten_sum(2, &adjoint(), 2, 1, 1000).unwrap();
        let c1 = w.series.coeff(&[1]);
        assert!(c1.re.is_finite() && c1.im.abs() < 1e-12);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn su2_verlinde_matches_general_formula() {
        let rs = root_system_from_label("A1").unwrap();
        for k in 1..6 {
            let lv = canonical_level(&rs, k).unwrap();
            for g in 0..4 {
                let a = su2_verlinde(k, g).unwrap();
                let b = verlinde_number(&rs, &lv, g).unwrap();
                assert!((a - b).abs() < 1e-6, "k={k} g={g}: {a} vs {b}");
            }
        }
        // genus two closed form (K+2)((K+2)²−1)/6
        let m = 2000.0f64;
        assert_eq!(su2_verlinde(1998, 2).unwrap(), m * (m * m - 1.0) / 6.0);
    }

    #[test]
    fn scaled_sequence_deviation() {
        let run = asymptotic_check(0, 2, &[10, 100, 1000]).unwrap();
        for r in &run.rows {
            let exact = 1.0 / (3.0 * (r.n as f64).powi(2));
            assert!((r.deviation - exact).abs() < 1e-9 * exact.max(1e-6));
        }
    }
}
