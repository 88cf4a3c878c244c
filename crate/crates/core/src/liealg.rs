//! Root systems of simply connected simple groups (times a torus), their
//! Weyl groups, and points of the maximal torus.
//!
//! Weights are written in the basis of fundamental weights (followed by the
//! standard basis of the torus factor), coweights in the basis of simple
//! coroots. The pairing `λ(μ)` is then the plain dot product.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::linalg::{self, IMat, QMat};
use crate::{Error, Result};

/// Simple factor of a supported group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimpleType {
    A(usize),
    C2,
    G2,
}

impl SimpleType {
    pub fn rank(self) -> usize {
        match self {
            SimpleType::A(n) => n,
            SimpleType::C2 | SimpleType::G2 => 2,
        }
    }

    /// Gram matrix of the simple roots, long roots of squared length 2.
    fn simple_root_gram(self) -> QMat {
        let q = |n: i64, d: i64| Rational64::new(n, d);
        match self {
            SimpleType::A(n) => (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match i.abs_diff(j) {
                            0 => q(2, 1),
                            1 => q(-1, 1),
                            _ => q(0, 1),
                        })
                        .collect()
                })
                .collect(),
            // α1 short, α2 long
            SimpleType::C2 => vec![vec![q(1, 1), q(-1, 1)], vec![q(-1, 1), q(2, 1)]],
            SimpleType::G2 => vec![vec![q(2, 3), q(-1, 1)], vec![q(-1, 1), q(2, 1)]],
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::A(n) => write!(f, "A{n}"),
            SimpleType::C2 => write!(f, "C2"),
            SimpleType::G2 => write!(f, "G2"),
        }
    }
}

/// An element of the Weyl group, acting on weight and coweight coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    pub weight_action: IMat,
    pub coweight_action: IMat,
    /// `(-1)^length`.
    pub sign: i64,
    pub length: usize,
}

impl WeylElement {
    pub fn act_weight(&self, lambda: &[i64]) -> Vec<i64> {
        linalg::mat_vec_i(&self.weight_action, lambda)
    }

    pub fn act_coweight(&self, mu: &[Rational64]) -> Vec<Rational64> {
        self.coweight_action
            .iter()
            .map(|row| {
                row.iter()
                    .zip(mu)
                    .fold(Rational64::zero(), |acc, (&a, &m)| acc + m * a)
            })
            .collect()
    }

    pub fn act_coweight_c(&self, xi: &[Complex64]) -> Vec<Complex64> {
        self.coweight_action
            .iter()
            .map(|row| row.iter().zip(xi).map(|(&a, &x)| x * a as f64).sum())
            .collect()
    }
}

/// Combinatorial data of `G = G_simple × T^k`.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub type_label: String,
    pub simple_type: Option<SimpleType>,
    pub simple_rank: usize,
    pub torus_rank: usize,
    pub rank: usize,
    /// `cartan_matrix[i][j] = α_j(H_i)` on the simple factor.
    pub cartan_matrix: IMat,
    pub simple_roots: Vec<Vec<i64>>,
    pub positive_roots: Vec<Vec<i64>>,
    /// Coroots of the positive roots, in simple-coroot coordinates.
    pub coroots: Vec<Vec<i64>>,
    pub rho: Vec<i64>,
    pub highest_root: Vec<i64>,
    pub highest_coroot: Vec<i64>,
    /// Basic invariant form on coweights; zero on the torus block.
    pub basic_form: IMat,
    pub dual_coxeter: i64,
    /// Inverse of the basic form on the simple block, i.e. the form on weights.
    weight_form: QMat,
    weyl: Vec<WeylElement>,
}

impl RootSystem {
    pub fn weyl_group(&self) -> &[WeylElement] {
        &self.weyl
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    /// All roots, positive ones first.
    pub fn all_roots(&self) -> Vec<Vec<i64>> {
        let mut v = self.positive_roots.clone();
        v.extend(
            self.positive_roots
                .iter()
                .map(|r| r.iter().map(|x| -x).collect::<Vec<_>>()),
        );
        v
    }

    pub fn dim(&self) -> usize {
        self.rank + 2 * self.positive_roots.len()
    }

    pub fn is_semisimple(&self) -> bool {
        self.torus_rank == 0
    }

    /// Invariant form on weights restricted to the simple factor.
    pub fn weight_inner(&self, a: &[i64], b: &[i64]) -> Rational64 {
        let s = self.simple_rank;
        let mut acc = Rational64::zero();
        for i in 0..s {
            for j in 0..s {
                acc += self.weight_form[i][j] * (a[i] * b[j]);
            }
        }
        acc
    }

    /// Coordinates of a weight in the simple-root basis (simple factor only).
    pub fn root_coordinates(&self, lambda: &[i64]) -> Vec<Rational64> {
        let s = self.simple_rank;
        let cartan = linalg::to_rational(&self.cartan_matrix);
        let inv = linalg::inverse_q(&cartan).expect("Cartan matrix is invertible");
        let v: Vec<Rational64> = lambda[..s].iter().map(|&x| Rational64::from_integer(x)).collect();
        linalg::mat_vec_q(&inv, &v)
    }

    pub fn is_dominant(&self, lambda: &[i64]) -> bool {
        lambda[..self.simple_rank].iter().all(|&x| x >= 0)
    }

    /// Conjugates `lambda` into the dominant chamber with simple reflections.
    /// Returns the dominant weight and the sign of the Weyl element used.
    pub fn to_dominant(&self, lambda: &[i64]) -> (Vec<i64>, i64) {
        let mut v = lambda.to_vec();
        let mut sign = 1;
        while let Some(i) = (0..self.simple_rank).find(|&i| v[i] < 0) {
            let c = v[i];
            for (x, a) in v.iter_mut().zip(&self.simple_roots[i]) {
                *x -= c * a;
            }
            sign = -sign;
        }
        (v, sign)
    }

    /// Is `alpha(mu)` non-integral for every root?
    pub fn is_regular_exact(&self, mu: &[Rational64]) -> bool {
        self.positive_roots
            .iter()
            .all(|a| !pair_q(a, mu).is_integer())
    }

    /// Maps a real coweight into the closed fundamental alcove
    /// `{ α_i(μ) ≥ 0, ϑ(μ) ≤ 1 }` by affine Weyl reflections.
    pub fn to_fundamental_alcove(&self, mu: &[Rational64]) -> Vec<Rational64> {
        let mut v = mu.to_vec();
        if self.simple_rank == 0 {
            return v.iter().map(|x| x - x.floor()).collect();
        }
        loop {
            if let Some(i) = (0..self.simple_rank).find(|&i| pair_q(&self.simple_roots[i], &v).is_negative()) {
                let c = pair_q(&self.simple_roots[i], &v);
                v[i] -= c;
                continue;
            }
            let th = pair_q(&self.highest_root, &v);
            if th > Rational64::one() {
                let shift = th - Rational64::one();
                for (x, h) in v.iter_mut().zip(&self.highest_coroot) {
                    *x -= shift * *h;
                }
                continue;
            }
            break;
        }
        for x in v.iter_mut().skip(self.simple_rank) {
            *x -= x.floor();
        }
        v
    }
}

pub fn pair_q(lambda: &[i64], mu: &[Rational64]) -> Rational64 {
    lambda
        .iter()
        .zip(mu)
        .fold(Rational64::zero(), |acc, (&l, &m)| acc + m * l)
}

pub fn pair_f(lambda: &[i64], mu: &[f64]) -> f64 {
    lambda.iter().zip(mu).map(|(&l, &m)| l as f64 * m).sum()
}

pub fn pair_c(lambda: &[i64], xi: &[Complex64]) -> Complex64 {
    lambda.iter().zip(xi).map(|(&l, &x)| x * l as f64).sum()
}

/// Parses labels such as `A2`, `C2`, `G2`, `T3`, `A1xT1`.
pub fn parse_type_label(label: &str) -> Result<(Option<SimpleType>, usize)> {
    let mut simple = None;
    let mut torus = 0usize;
    let norm = label.replace('×', "x").replace('+', "x");
    for part in norm.split(['x', 'X']).filter(|p| !p.is_empty()) {
        let part = part.trim();
        let (head, num) = part.split_at(1);
        let n: usize = num
            .parse()
            .map_err(|_| Error::UnsupportedType(label.to_string()))?;
        match head {
            "T" | "t" => torus += n,
            "A" | "a" if (1..=4).contains(&n) && simple.is_none() => simple = Some(SimpleType::A(n)),
            "C" | "c" if n == 2 && simple.is_none() => simple = Some(SimpleType::C2),
            "G" | "g" if n == 2 && simple.is_none() => simple = Some(SimpleType::G2),
            _ => return Err(Error::UnsupportedType(label.to_string())),
        }
    }
    if simple.is_none() && torus == 0 {
        return Err(Error::UnsupportedType(label.to_string()));
    }
    Ok((simple, torus))
}

/// Builds the root system of a simple factor of the given type and rank.
/// `type_label` is one of `A`, `C`, `G`, `T`, or a full label like `A1xT1`
/// (in which case `rank` is ignored).
pub fn build_root_system(type_label: &str, rank: usize) -> Result<RootSystem> {
    let full = if type_label.len() == 1 {
        format!("{type_label}{rank}")
    } else {
        type_label.to_string()
    };
    let (simple, torus) = parse_type_label(&full)?;
    Ok(assemble(simple, torus))
}

pub fn root_system_from_label(label: &str) -> Result<RootSystem> {
    let (simple, torus) = parse_type_label(label)?;
    Ok(assemble(simple, torus))
}

fn assemble(simple: Option<SimpleType>, torus_rank: usize) -> RootSystem {
    let s = simple.map_or(0, SimpleType::rank);
    let rank = s + torus_rank;
    let gram = simple.map_or_else(Vec::new, SimpleType::simple_root_gram);
    let two = Rational64::from_integer(2);
    let four = Rational64::from_integer(4);

    let cartan: IMat = (0..s)
        .map(|i| (0..s).map(|j| (two * gram[i][j] / gram[i][i]).to_integer()).collect())
        .collect();

    let mut basic_form = vec![vec![0i64; rank]; rank];
    for i in 0..s {
        for j in 0..s {
            let v = four * gram[i][j] / (gram[i][i] * gram[j][j]);
            debug_assert!(v.is_integer());
            basic_form[i][j] = v.to_integer();
        }
    }
    let weight_form = if s > 0 {
        let block: IMat = (0..s).map(|i| basic_form[i][..s].to_vec()).collect();
        linalg::inverse_q(&linalg::to_rational(&block)).expect("basic form is nondegenerate")
    } else {
        Vec::new()
    };

    // simple root α_j in weight coordinates: (α_j(H_i))_i
    let simple_roots: Vec<Vec<i64>> = (0..s)
        .map(|j| {
            let mut v = vec![0i64; rank];
            for (i, x) in v.iter_mut().enumerate().take(s) {
                *x = cartan[i][j];
            }
            v
        })
        .collect();

    // roots by reflection closure, tracked in simple-root coordinates
    let mut roots: Vec<Vec<i64>> = Vec::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    for j in 0..s {
        let mut e = vec![0i64; s];
        e[j] = 1;
        queue.push_back(e);
    }
    while let Some(r) = queue.pop_front() {
        if roots.contains(&r) {
            continue;
        }
        for i in 0..s {
            let pairing: i64 = (0..s).map(|k| r[k] * cartan[i][k]).sum();
            let mut nr = r.clone();
            nr[i] -= pairing;
            if !roots.contains(&nr) {
                queue.push_back(nr);
            }
        }
        roots.push(r);
    }
    let mut positive: Vec<Vec<i64>> = roots.into_iter().filter(|r| r.iter().all(|&x| x >= 0)).collect();
    positive.sort_by_key(|r| (r.iter().sum::<i64>(), r.iter().map(|x| -x).collect::<Vec<_>>()));
    let to_weight = |r: &[i64]| -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for (i, x) in v.iter_mut().enumerate().take(s) {
            *x = (0..s).map(|k| r[k] * cartan[i][k]).sum();
        }
        v
    };
    let positive_roots: Vec<Vec<i64>> = positive.iter().map(|r| to_weight(r)).collect();
    let highest_root = positive_roots.last().cloned().unwrap_or_else(|| vec![0; rank]);

    let coroot_of = |w: &[i64]| -> Vec<i64> {
        if s == 0 {
            return vec![0; rank];
        }
        let wq: Vec<Rational64> = w[..s].iter().map(|&x| Rational64::from_integer(x)).collect();
        let v = linalg::mat_vec_q(&weight_form, &wq);
        let len2 = v.iter().zip(&wq).fold(Rational64::zero(), |a, (x, y)| a + x * y);
        let mut out = vec![0i64; rank];
        for i in 0..s {
            let c = two * v[i] / len2;
            debug_assert!(c.is_integer());
            out[i] = c.to_integer();
        }
        out
    };
    let coroots: Vec<Vec<i64>> = positive_roots.iter().map(|r| coroot_of(r)).collect();
    let highest_coroot = coroot_of(&highest_root);

    let mut rho = vec![0i64; rank];
    for x in rho.iter_mut().take(s) {
        *x = 1;
    }
    let dual_coxeter = if s == 0 { 0 } else { pair_i(&rho, &highest_coroot) + 1 };

    let label = match (simple, torus_rank) {
        (Some(t), 0) => t.to_string(),
        (Some(t), k) => format!("{t}xT{k}"),
        (None, k) => format!("T{k}"),
    };

    let gens: Vec<(usize, Vec<i64>)> = simple_roots.iter().cloned().enumerate().collect();
    let weyl = generate_weyl(&gens, rank);

    RootSystem {
        type_label: label,
        simple_type: simple,
        simple_rank: s,
        torus_rank,
        rank,
        cartan_matrix: cartan,
        simple_roots,
        positive_roots,
        coroots,
        rho,
        highest_root,
        highest_coroot,
        basic_form,
        dual_coxeter,
        weight_form,
        weyl,
    }
}

fn pair_i(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn generate_weyl(simple: &[(usize, Vec<i64>)], rank: usize) -> Vec<WeylElement> {
    let gens: Vec<(IMat, IMat)> = simple
        .iter()
        .map(|(i, root)| {
            let i = *i;
            // weights: λ ↦ λ - λ_i α_i ; coweights: μ ↦ μ - α_i(μ) H_i
            let mut w = linalg::identity_i(rank);
            for (r, row) in w.iter_mut().enumerate() {
                row[i] -= root[r];
            }
            let mut c = linalg::identity_i(rank);
            for j in 0..rank {
                c[i][j] -= root[j];
            }
            (w, c)
        })
        .collect();
    let id = WeylElement {
        weight_action: linalg::identity_i(rank),
        coweight_action: linalg::identity_i(rank),
        sign: 1,
        length: 0,
    };
    let mut seen: HashMap<IMat, usize> = HashMap::new();
    seen.insert(id.weight_action.clone(), 0);
    let mut elems = vec![id];
    let mut head = 0;
    while head < elems.len() {
        let cur = elems[head].clone();
        head += 1;
        for (gw, gc) in &gens {
            let w = linalg::mat_mul_i(gw, &cur.weight_action);
            if seen.contains_key(&w) {
                continue;
            }
            let c = linalg::mat_mul_i(gc, &cur.coweight_action);
            seen.insert(w.clone(), elems.len());
            elems.push(WeylElement {
                weight_action: w,
                coweight_action: c,
                sign: -cur.sign,
                length: cur.length + 1,
            });
        }
    }
    elems
}

/// Weyl group as a list of elements (identity first, sorted by length).
pub fn weyl_group(rs: &RootSystem) -> Vec<WeylElement> {
    rs.weyl.clone()
}

/// A point `f = exp(2πi μ) · exp(ξ)` of the maximal torus.
#[derive(Debug, Clone)]
pub struct TorusPoint {
    pub mu: Vec<Rational64>,
    pub correction: Option<Vec<Complex64>>,
    regular: bool,
}

impl TorusPoint {
    pub fn new(rs: &RootSystem, mu: Vec<Rational64>) -> Self {
        let regular = rs.is_regular_exact(&mu);
        TorusPoint { mu, correction: None, regular }
    }

    pub fn identity(rs: &RootSystem) -> Self {
        Self::new(rs, vec![Rational64::zero(); rs.rank])
    }

    pub fn with_correction(rs: &RootSystem, mu: Vec<Rational64>, xi: Vec<Complex64>) -> Self {
        let mut p = Self::new(rs, mu);
        if xi.iter().any(|x| x.norm() > 0.0) {
            p.correction = Some(xi);
            p.regular = rs.positive_roots.iter().all(|a| {
                let z = p.exp_weight(a);
                (z - 1.0).norm() > 1e-12
            });
        }
        p
    }

    pub fn rank(&self) -> usize {
        self.mu.len()
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// `e^λ(f)`, with the rational phase reduced exactly mod 1.
    pub fn exp_weight(&self, lambda: &[i64]) -> Complex64 {
        let phase = pair_q(lambda, &self.mu);
        let frac = phase - phase.floor();
        let mut z = Complex64::from_polar(1.0, 2.0 * PI * linalg::q_to_f64(frac));
        if let Some(xi) = &self.correction {
            z *= pair_c(lambda, xi).exp();
        }
        z
    }

    /// `μ` reduced into `[0,1)^ℓ`.
    pub fn reduced_mu(&self) -> Vec<Rational64> {
        self.mu.iter().map(|x| x - x.floor()).collect()
    }

    pub fn act(&self, rs: &RootSystem, w: &WeylElement) -> TorusPoint {
        let mu = w.act_coweight(&self.mu);
        match &self.correction {
            Some(xi) => TorusPoint::with_correction(rs, mu, w.act_coweight_c(xi)),
            None => TorusPoint::new(rs, mu),
        }
    }

    /// `f^n`: `μ` and the correction scaled by `n`.
    pub fn power(&self, rs: &RootSystem, n: i64) -> TorusPoint {
        let mu = self.mu.iter().map(|x| x * n).collect();
        match &self.correction {
            Some(xi) => TorusPoint::with_correction(rs, mu, xi.iter().map(|x| x * n as f64).collect()),
            None => TorusPoint::new(rs, mu),
        }
    }

    /// Equality as torus points: `μ` congruent mod the coweight lattice and
    /// corrections equal within `tol`.
    pub fn same_point(&self, other: &TorusPoint, tol: f64) -> bool {
        let lattice = self
            .mu
            .iter()
            .zip(&other.mu)
            .all(|(a, b)| (a - b).is_integer());
        let zero = vec![Complex64::zero(); self.rank()];
        let a = self.correction.as_ref().unwrap_or(&zero);
        let b = other.correction.as_ref().unwrap_or(&zero);
        lattice && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }
}

/// `Δ(f)² = ∏_{all roots}(1 − e^α(f))`.
pub fn weyl_denominator_sq(rs: &RootSystem, f: &TorusPoint) -> Complex64 {
    rs.positive_roots
        .iter()
        .map(|a| {
            let z = f.exp_weight(a);
            (Complex64::one() - z) * (Complex64::one() - z.inv())
        })
        .product()
}

/// `W(q) / W_Φ(q)` where `W_Φ` is generated by the simple reflections in `subset`.
pub fn poincare_polynomial(rs: &RootSystem, subset: &[usize]) -> Result<Vec<i64>> {
    if let Some(&bad) = subset.iter().find(|&&i| i >= rs.simple_rank) {
        return Err(Error::InvalidInput(format!("simple root index {bad} out of range")));
    }
    let full = length_polynomial(&rs.weyl);
    let gens: Vec<(usize, Vec<i64>)> = subset.iter().map(|&i| (i, rs.simple_roots[i].clone())).collect();
    let sub = generate_weyl(&gens, rs.rank);
    let sub_poly = length_polynomial(&sub);
    poly_div_exact(&full, &sub_poly)
        .ok_or_else(|| Error::Inconsistency("parabolic Poincaré polynomial does not divide".into()))
}

fn length_polynomial(elems: &[WeylElement]) -> Vec<i64> {
    let max = elems.iter().map(|e| e.length).max().unwrap_or(0);
    let mut p = vec![0i64; max + 1];
    for e in elems {
        p[e.length] += 1;
    }
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Option<Vec<i64>> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    if r.len() < den.len() {
        return None;
    }
    let mut q = vec![0i64; r.len() - dd];
    for k in (0..q.len()).rev() {
        let c = r[k + dd];
        if c % den[dd] != 0 {
            return None;
        }
        let c = c / den[dd];
        q[k] = c;
        for (j, &d) in den.iter().enumerate() {
            r[k + j] -= c * d;
        }
    }
    r.iter().all(|&x| x == 0).then_some(q)
}

/// Evaluates an integer polynomial at `x`.
pub fn eval_poly(p: &[i64], x: i64) -> i64 {
    p.iter().rev().fold(0, |acc, &c| acc * x + c)
}
