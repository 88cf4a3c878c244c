//! Virtual characters of the maximal torus: Freudenthal multiplicities,
//! Borel–Weil–Bott induction, evaluation with first and second derivatives,
//! Adams operations.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::liealg::{RootSystem, TorusPoint};
use crate::series::Series;
use crate::{Error, Result};

/// Finitely supported map weight → multiplicity. Multiplicities may be
/// negative; zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Character {
    weights: BTreeMap<Vec<i64>, i64>,
}

impl Character {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn trivial(rank: usize) -> Self {
        Self::from_weights([(vec![0; rank], 1)])
    }

    pub fn from_weights<I: IntoIterator<Item = (Vec<i64>, i64)>>(items: I) -> Self {
        let mut c = Self::zero();
        for (w, m) in items {
            c.add_weight(w, m);
        }
        c
    }

    pub fn add_weight(&mut self, w: Vec<i64>, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.weights.entry(w.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.weights.remove(&w);
        }
    }

    pub fn multiplicity(&self, w: &[i64]) -> i64 {
        self.weights.get(w).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &i64)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> i64 {
        self.weights.values().sum()
    }

    pub fn scaled(&self, k: i64) -> Character {
        Character::from_weights(self.weights.iter().map(|(w, m)| (w.clone(), m * k)))
    }

    pub fn add(&self, other: &Character) -> Character {
        let mut c = self.clone();
        for (w, m) in &other.weights {
            c.add_weight(w.clone(), *m);
        }
        c
    }

    pub fn tensor(&self, other: &Character) -> Character {
        let mut c = Character::zero();
        for (a, ma) in &self.weights {
            for (b, mb) in &other.weights {
                let w = a.iter().zip(b).map(|(x, y)| x + y).collect();
                c.add_weight(w, ma * mb);
            }
        }
        c
    }

    pub fn dual(&self) -> Character {
        Character::from_weights(
            self.weights
                .iter()
                .map(|(w, m)| (w.iter().map(|x| -x).collect(), *m)),
        )
    }

    pub fn is_weyl_invariant(&self, rs: &RootSystem) -> bool {
        rs.weyl_group().iter().all(|w| {
            self.weights
                .iter()
                .all(|(lam, m)| self.multiplicity(&w.act_weight(lam)) == *m)
        })
    }
}

/// Irreducible character with dominant highest weight `lambda`.
pub fn irred_character(rs: &RootSystem, lambda: &[i64]) -> Result<Character> {
    if lambda.len() != rs.rank {
        return Err(Error::InvalidInput(format!(
            "weight has {} coordinates, expected {}",
            lambda.len(),
            rs.rank
        )));
    }
    if !rs.is_dominant(lambda) {
        return Err(Error::InvalidInput(format!("weight {lambda:?} is not dominant")));
    }
    let dominant = dominant_multiplicities(rs, lambda);
    let mut c = Character::zero();
    for (mu, m) in dominant {
        let mut orbit: Vec<Vec<i64>> = rs.weyl_group().iter().map(|w| w.act_weight(&mu)).collect();
        orbit.sort();
        orbit.dedup();
        for nu in orbit {
            c.add_weight(nu, m);
        }
    }
    Ok(c)
}

fn dominant_multiplicities(rs: &RootSystem, lambda: &[i64]) -> Vec<(Vec<i64>, i64)> {
    // weights of V_λ reached by lowering with simple roots
    let is_weight = |nu: &[i64]| -> Option<i64> {
        let (dom, _) = rs.to_dominant(nu);
        let diff: Vec<i64> = lambda.iter().zip(&dom).map(|(a, b)| a - b).collect();
        if diff[rs.simple_rank..].iter().any(|&x| x != 0) {
            return None;
        }
        let coords = rs.root_coordinates(&diff);
        if coords.iter().all(|c| c.is_integer() && *c >= Rational64::zero()) {
            Some(coords.iter().map(|c| c.to_integer()).sum())
        } else {
            None
        }
    };

    let mut depth: HashMap<Vec<i64>, i64> = HashMap::new();
    let mut queue = VecDeque::from([lambda.to_vec()]);
    depth.insert(lambda.to_vec(), 0);
    while let Some(mu) = queue.pop_front() {
        for a in &rs.simple_roots {
            let nu: Vec<i64> = mu.iter().zip(a).map(|(x, y)| x - y).collect();
            if depth.contains_key(&nu) {
                continue;
            }
            if let Some(d) = is_weight(&nu) {
                depth.insert(nu.clone(), d);
                queue.push_back(nu);
            }
        }
    }
    let mut dominant: Vec<(Vec<i64>, i64)> = depth
        .into_iter()
        .filter(|(mu, _)| rs.is_dominant(mu))
        .collect();
    dominant.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));

    let rho = &rs.rho;
    let shift = |v: &[i64]| -> Vec<i64> { v.iter().zip(rho).map(|(a, b)| a + b).collect() };
    let lr = shift(lambda);
    let norm_lr = rs.weight_inner(&lr, &lr);

    let mut mult: HashMap<Vec<i64>, i64> = HashMap::new();
    let lookup = |mult: &HashMap<Vec<i64>, i64>, nu: &[i64]| -> i64 {
        let (dom, _) = rs.to_dominant(nu);
        mult.get(&dom).copied().unwrap_or(0)
    };
    let mut out = Vec::with_capacity(dominant.len());
    for (mu, _) in dominant {
        let m = if mu == lambda {
            1
        } else {
            let mut num = Rational64::zero();
            for a in &rs.positive_roots {
                let mut j = 1;
                loop {
                    let nu: Vec<i64> = mu.iter().zip(a).map(|(x, y)| x + j * y).collect();
                    let m_nu = lookup(&mult, &nu);
                    if m_nu == 0 {
                        break;
                    }
                    num += rs.weight_inner(&nu, a) * m_nu;
                    j += 1;
                }
            }
            let mr = shift(&mu);
            let den = norm_lr - rs.weight_inner(&mr, &mr);
            let val = num * 2 / den;
            debug_assert!(val.is_integer(), "Freudenthal multiplicity not integral");
            val.to_integer()
        };
        mult.insert(mu.clone(), m);
        out.push((mu, m));
    }
    out
}

/// Equivariant index of the weight line bundle on the flag variety: zero
/// when `μ+ρ` is singular, else `sign(w)·V_{w(μ+ρ)−ρ}`.
pub fn holo_induce(rs: &RootSystem, mu: &[i64]) -> Result<Character> {
    let shifted: Vec<i64> = mu.iter().zip(&rs.rho).map(|(a, b)| a + b).collect();
    let (dom, sign) = rs.to_dominant(&shifted);
    if dom[..rs.simple_rank].iter().any(|&x| x == 0) {
        return Ok(Character::zero());
    }
    let top: Vec<i64> = dom.iter().zip(&rs.rho).map(|(a, b)| a - b).collect();
    Ok(irred_character(rs, &top)?.scaled(sign))
}

/// Adjoint character, including the Cartan (zero) weights.
pub fn adjoint_character(rs: &RootSystem) -> Character {
    let mut c = Character::from_weights(rs.all_roots().into_iter().map(|r| (r, 1)));
    c.add_weight(vec![0; rs.rank], rs.rank as i64);
    c
}

/// `Σ m_λ e^λ(f)`.
pub fn trace_eval(ch: &Character, f: &TorusPoint) -> Complex64 {
    ch.iter()
        .map(|(w, &m)| f.exp_weight(w) * m as f64)
        .sum()
}

/// Differential `Σ m_λ e^λ(f) λ`, a covector in weight coordinates.
pub fn trace_gradient(ch: &Character, f: &TorusPoint) -> Vec<Complex64> {
    let mut g = vec![Complex64::zero(); f.rank()];
    for (w, &m) in ch.iter() {
        let z = f.exp_weight(w) * m as f64;
        for (gi, &wi) in g.iter_mut().zip(w) {
            *gi += z * wi as f64;
        }
    }
    g
}

/// Hessian `Σ m_λ e^λ(f) λ⊗λ`.
pub fn trace_hessian(ch: &Character, f: &TorusPoint) -> Vec<Vec<Complex64>> {
    let n = f.rank();
    let mut h = vec![vec![Complex64::zero(); n]; n];
    for (w, &m) in ch.iter() {
        let z = f.exp_weight(w) * m as f64;
        for i in 0..n {
            for j in 0..n {
                h[i][j] += z * (w[i] * w[j]) as f64;
            }
        }
    }
    h
}

/// `e^λ ↦ e^{nλ}`.
pub fn adams(ch: &Character, n: i64) -> Result<Character> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("Adams operation needs n >= 1, got {n}")));
    }
    Ok(Character::from_weights(
        ch.iter().map(|(w, &m)| (w.iter().map(|x| x * n).collect(), m)),
    ))
}

/// `(1+t)^ℓ ∏_{all α} (1 + t e^α(f))`.
pub fn lambda_t_adjoint_eval(rs: &RootSystem, f: &TorusPoint, t: Complex64) -> Complex64 {
    let one = Complex64::one();
    let mut v = (one + t).powu(rs.rank as u32);
    for a in rs.all_roots() {
        v *= one + t * f.exp_weight(&a);
    }
    v
}

/// Series version of [`lambda_t_adjoint_eval`], `t` any series.
pub fn lambda_t_adjoint_series(rs: &RootSystem, f: &TorusPoint, t: &Series) -> Series {
    let one = t.constant(Complex64::one());
    let mut v = (&one + t).powi(rs.rank as i64).expect("nonnegative power");
    for a in rs.all_roots() {
        v = &v * &(&one + &t.scale(f.exp_weight(&a)));
    }
    v
}
