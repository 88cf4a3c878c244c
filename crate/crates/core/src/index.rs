//! Index formulas: the even-class sum over deformed Verlinde points, the
//! rank-one closed form, Pfaffian insertions for odd classes, the graded
//! variant, and affine-Weyl bookkeeping for Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::One;
use rayon::prelude::*;

use crate::charfun::{holo_induce, Character};
use crate::deform::{
    gradient_series, h_prime_inverse_c, solve_deformed, theta_t, trace_at, weight_exp_series,
    weighted_gradient, weighted_hessian, DeformationSpec, DeformedPoint,
};
use crate::levels::{regular_orbit_representatives, Level, PointSet};
use crate::linalg::{self, IMat};
use crate::liealg::RootSystem;
use crate::series::{self, Series, SeriesMat, SeriesRing};
use crate::{Error, Result};

/// Odd insertions `E*_{C_k} U_k` with the intersection form of the cycles.
#[derive(Debug, Clone)]
pub struct OddClassSpec {
    pub factors: Vec<(String, Character)>,
    pub intersections: IMat,
}

impl OddClassSpec {
    pub fn new(factors: Vec<(String, Character)>, intersections: IMat) -> Result<Self> {
        let n = factors.len();
        if intersections.len() != n || intersections.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("intersection matrix must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if intersections[i][j] != -intersections[j][i] {
                    return Err(Error::InvalidInput(
                        "intersection matrix must be antisymmetric".into(),
                    ));
                }
            }
        }
        Ok(Self { factors, intersections })
    }
}

#[derive(Debug, Clone)]
pub struct IndexRequest {
    pub genus: u32,
    pub spec: DeformationSpec,
    pub insertion: Character,
    pub odd: Option<OddClassSpec>,
    pub point_set: PointSet,
}

impl IndexRequest {
    pub fn even(genus: u32, spec: DeformationSpec, insertion: Character) -> Self {
        Self { genus, spec, insertion, odd: None, point_set: PointSet::Shifted }
    }
}

fn deformed_points(rs: &RootSystem, level: &Level, req: &IndexRequest) -> Result<Vec<DeformedPoint>> {
    let reps = regular_orbit_representatives(rs, level, req.point_set)?;
    reps.par_iter()
        .map(|p| solve_deformed(rs, level, &req.spec, p))
        .collect()
}

fn ordered_sum(ring: &std::sync::Arc<SeriesRing>, terms: Vec<Series>) -> Series {
    terms.iter().fold(Series::zero(ring), |acc, t| &acc + t)
}

fn even_term(rs: &RootSystem, level: &Level, req: &IndexRequest, dp: &DeformedPoint) -> Result<Series> {
    let theta = theta_t(rs, level, &req.spec, dp, level.f_order)?;
    let weight = theta.powi(1 - req.genus as i64)?;
    Ok(&weight * &trace_at(dp, &req.insertion))
}

/// `Σ_{f ∈ F^reg/W} θ_t(f)^{1−g} Tr_U(f_t)`; odd insertions are ignored.
pub fn index_even(rs: &RootSystem, level: &Level, req: &IndexRequest) -> Result<Series> {
    check_insertion(rs, &req.insertion)?;
    let ring = req.spec.ring()?;
    let pts = deformed_points(rs, level, req)?;
    let terms: Vec<Series> = pts
        .par_iter()
        .map(|dp| even_term(rs, level, req, dp))
        .collect::<Result<_>>()?;
    Ok(ordered_sum(&ring, terms))
}

/// Same sum, including the Pfaffian `[ψ]` of the odd insertions.
pub fn index_general(rs: &RootSystem, level: &Level, req: &IndexRequest) -> Result<Series> {
    let Some(odd) = &req.odd else {
        return index_even(rs, level, req);
    };
    check_insertion(rs, &req.insertion)?;
    let ring = req.spec.ring()?;
    if odd.factors.len() % 2 == 1 {
        return Ok(Series::zero(&ring));
    }
    let pts = deformed_points(rs, level, req)?;
    let terms: Vec<Series> = pts
        .par_iter()
        .map(|dp| {
            let even = even_term(rs, level, req, dp)?;
            Ok(&even * &odd_bracket(level, &req.spec, odd, dp)?)
        })
        .collect::<Result<_>>()?;
    Ok(ordered_sum(&ring, terms))
}

/// The sum over the kernel point set `F` instead of `F_ρ`.
pub fn index_graded(rs: &RootSystem, level: &Level, req: &IndexRequest) -> Result<Series> {
    let graded = IndexRequest { point_set: PointSet::Kernel, ..req.clone() };
    index_general(rs, level, &graded)
}

fn check_insertion(rs: &RootSystem, u: &Character) -> Result<()> {
    if u.iter().any(|(w, _)| w.len() != rs.rank) {
        return Err(Error::InvalidInput("insertion character has the wrong rank".into()));
    }
    Ok(())
}

/// `[ψ](f_t)`: Pfaffian of `A_ab = −#(C_a∩C_b)·⟨dTr_{U_a} | dTr_{U_b}⟩`, the
/// pairing being the inverse of `h′ + Σ t_i H_{V_i}(f_t)`. Zero for an odd
/// number of factors.
pub fn odd_bracket(
    level: &Level,
    spec: &DeformationSpec,
    odd: &OddClassSpec,
    dp: &DeformedPoint,
) -> Result<Series> {
    let ring = dp.ring().clone();
    let n = odd.factors.len();
    if n % 2 == 1 {
        return Ok(Series::zero(&ring));
    }
    if n == 0 {
        return Ok(Series::from_constant(&ring, Complex64::one()));
    }
    let f = &dp.base.point;
    let terms = spec.weighted_terms(&ring)?;
    let hp = series::mat_from_constants(&ring, &linalg::cmat_from_i(&level.h_prime));
    let form = series::mat_add(&hp, &weighted_hessian(&terms, f, &dp.xi));
    let pairing = series::mat_inverse(&form)?;
    let grads: Vec<Vec<Series>> = odd
        .factors
        .iter()
        .map(|(_, u)| gradient_series(u, f, &dp.xi))
        .collect();
    let mut a: SeriesMat = vec![vec![Series::zero(&ring); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = odd.intersections[i][j];
            if c != 0 {
                let v = series::bilinear(&grads[i], &pairing, &grads[j]).scale_re(-(c as f64));
                a[j][i] = -&v;
                a[i][j] = v;
            }
        }
    }
    Ok(pfaffian(&a))
}

/// Pfaffian of an antisymmetric matrix of series, by expansion along the
/// first row.
pub fn pfaffian(a: &SeriesMat) -> Series {
    let n = a.len();
    let ring = a[0][0].ring().clone();
    fn rec(a: &SeriesMat, idx: &[usize], ring: &std::sync::Arc<SeriesRing>) -> Series {
        if idx.is_empty() {
            return Series::from_constant(ring, Complex64::one());
        }
        let first = idx[0];
        let mut acc = Series::zero(ring);
        for (pos, &j) in idx.iter().enumerate().skip(1) {
            if a[first][j].max_abs_coeff() == 0.0 {
                continue;
            }
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != j).collect();
            let term = &a[first][j] * &rec(a, &rest, ring);
            acc = if pos % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        acc
    }
    if n % 2 == 1 {
        return Series::zero(&ring);
    }
    let idx: Vec<usize> = (0..n).collect();
    rec(a, &idx, &ring)
}

/// Rank-one closed form: with `ζ_t = ζ e^u` and `(2l+4)u + tφ̇(ζ_t) = 0`,
/// `Σ_{j=1}^{l+1} [(2l+4 + tφ̈(ζ_t)) / |ζ_t − ζ_t⁻¹|²]^{g−1}`, `ζ = e^{iπj/(l+2)}`.
/// `phi` maps exponents `n` to the multiplicity of `ζ^n`.
pub fn index_su2_form(l: i64, phi: &BTreeMap<i64, i64>, genus: u32, order: usize) -> Result<Series> {
    if l < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {l}")));
    }
    for (&n, &m) in phi {
        if phi.get(&-n).copied().unwrap_or(0) != m {
            return Err(Error::InvalidInput(format!(
                "φ must be symmetric under ζ ↦ ζ⁻¹ (coefficient of ζ^{n})"
            )));
        }
    }
    let ring = SeriesRing::new(&["t"], order)?;
    let t = Series::variable(&ring, "t")?;
    let shifted = (2 * l + 4) as f64;
    let mut total = Series::zero(&ring);
    for j in 1..=l + 1 {
        let zeta = Complex64::from_polar(1.0, PI * j as f64 / (l + 2) as f64);
        // ζ_t^n = ζ^n e^{n u}
        let power = |u: &Series, n: i64| u.scale_re(n as f64).exp().scale(zeta.powi(n as i32));
        let derivative = |u: &Series, k: u32| {
            phi.iter().fold(Series::zero(&ring), |acc, (&n, &m)| {
                &acc + &power(u, n).scale_re((m * n.pow(k)) as f64)
            })
        };
        let mut u = Series::zero(&ring);
        for _ in 0..=order {
            u = (&t * &derivative(&u, 1)).scale_re(-1.0 / shifted);
        }
        let zt = power(&u, 1);
        let diff = &zt - &power(&u, -1);
        let denom = -(&diff * &diff);
        let numer = &t.constant(Complex64::new(shifted, 0.0)) + &(&t * &derivative(&u, 2));
        let term = (&numer * &denom.inv()?).powi(genus as i64 - 1)?;
        total = &total + &term;
    }
    Ok(total)
}

/// Weight character `φ` of an `SL(2)` character (coordinates in units of ω).
pub fn su2_phi(ch: &Character) -> BTreeMap<i64, i64> {
    ch.iter().map(|(w, &m)| (w[0], m)).collect()
}

/// Insertion whose index is the Fourier coefficient `I(μ)`: the character of
/// the representation induced from the opposite Borel at weight `μ − ρ`,
/// i.e. `(−1)^N·A(μ)/A(ρ)` with `N` the number of positive roots.
pub fn fourier_insertion(rs: &RootSystem, mu: &[i64]) -> Result<Character> {
    let shifted: Vec<i64> = mu.iter().zip(&rs.rho).map(|(a, b)| a - b).collect();
    let sign = if rs.num_positive_roots() % 2 == 0 { 1 } else { -1 };
    Ok(holo_induce(rs, &shifted)?.scaled(sign))
}

/// `I(μ)` at `t = 0`.
pub fn fourier_coefficient(rs: &RootSystem, level: &Level, genus: u32, mu: &[i64]) -> Result<f64> {
    let req = IndexRequest::even(genus, DeformationSpec::empty(0), fourier_insertion(rs, mu)?);
    Ok(index_even(rs, level, &req)?.constant_term().re)
}

/// `s_ϑ μ − ι(H_ϑ)h′`, the affine reflection in the highest-root wall.
pub fn affine_reflection(rs: &RootSystem, level: &Level, mu: &[i64]) -> Vec<i64> {
    let pairing: i64 = mu.iter().zip(&rs.highest_coroot).map(|(a, b)| a * b).sum();
    let shift = linalg::mat_vec_i(&level.h_prime, &rs.highest_coroot);
    (0..rs.rank)
        .map(|i| mu[i] - pairing * rs.highest_root[i] - shift[i])
        .collect()
}

/// `μ + ι(γ)h′`.
pub fn lattice_translate(level: &Level, mu: &[i64], coroot: &[i64]) -> Vec<i64> {
    let shift = linalg::mat_vec_i(&level.h_prime, coroot);
    mu.iter().zip(&shift).map(|(a, b)| a + b).collect()
}

/// Value at `f_t` of the multiplier `exp[ι(γ)h′ + Σ t_i ∂Tr_{V_i}/∂γ]` through
/// which the deformed affine action enters.
pub fn affine_multiplier(
    level: &Level,
    spec: &DeformationSpec,
    dp: &DeformedPoint,
    coroot: &[i64],
) -> Result<Series> {
    let weight = linalg::mat_vec_i(&level.h_prime, coroot);
    let base = weight_exp_series(&dp.base.point, &weight, &dp.xi);
    let terms = spec.weighted_terms(dp.ring())?;
    let grad = weighted_gradient(&terms, &dp.base.point, &dp.xi);
    let directional = grad
        .iter()
        .zip(coroot)
        .fold(Series::zero(dp.ring()), |acc, (g, &c)| &acc + &g.scale_re(c as f64));
    Ok(&base * &directional.exp())
}

/// `h′⁻¹` in floating point, for callers assembling their own pairings.
pub fn pairing_at_zero(level: &Level) -> Result<nalgebra::DMatrix<Complex64>> {
    h_prime_inverse_c(level)
}

/// `n!·[tⁿ]` for the single variable `var`; the distance to the nearest
/// integer is the integrality defect.
pub fn scaled_coefficients(s: &Series, var: &str) -> Vec<Complex64> {
    let mut fact = 1.0;
    (0..=s.order() as u32)
        .map(|n| {
            if n > 0 {
                fact *= n as f64;
            }
            s.coeff_of_power(var, n) * fact
        })
        .collect()
}

pub fn integrality_defect(z: Complex64) -> f64 {
    (z.re - z.re.round()).abs().max(z.im.abs())
}
