//! The quantum plane `xy = q yx` and its commutative limit.
//!
//! Elements are stored in the T-basis `T^j_m ∝ x^{j−m} y^{j+m}`, which
//! completely reduces the plane into spin-`j` modules. The deformed and the
//! classical algebra share this basis; they differ only in the normalization
//! that links `T^j_m` to monomials:
//!
//! ```text
//! deformed:  T^j_m = [2j choose j+m]_{q^{-2}}^{1/2} x^{j−m} y^{j+m}
//! classical: T^j_m = (2j choose j+m)^{1/2}          x^{j−m} y^{j+m}
//! ```
//!
//! The twist-induced star product acts on the classical algebra:
//! `a ⋆ b = μ(F⁻¹ ▷ (a ⊗ b))`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::cgc::{cg, qcg, CGQuery};
use crate::error::{Error, Result};
use crate::hseries::{gauss_binomial, q_power, HSeries, HalfInt, DEFAULT_ORDER};
use crate::matrix::SeriesMatrix;
use crate::reps::{coproduct_terms, factor_matrix, Factor, Generator};
use crate::twist::{twist_rep, EtaFunction, TwistRep};

/// Finite combination `Σ c_{j,m} T^j_m` with series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneElement {
    order: usize,
    terms: BTreeMap<(HalfInt, HalfInt), HSeries>,
}

impl PlaneElement {
    pub fn zero(order: usize) -> Self {
        PlaneElement { order, terms: BTreeMap::new() }
    }

    pub fn one(order: usize) -> Self {
        Self::basis(HalfInt::ZERO, HalfInt::ZERO, order).expect("valid weight")
    }

    /// `x = T^{1/2}_{−1/2}`.
    pub fn x(order: usize) -> Self {
        Self::basis(HalfInt::HALF, -HalfInt::HALF, order).expect("valid weight")
    }

    /// `y = T^{1/2}_{1/2}`.
    pub fn y(order: usize) -> Self {
        Self::basis(HalfInt::HALF, HalfInt::HALF, order).expect("valid weight")
    }

    pub fn basis(j: HalfInt, m: HalfInt, order: usize) -> Result<Self> {
        let mut e = Self::zero(order);
        e.add_term(j, m, &HSeries::one(order))?;
        Ok(e)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (HalfInt, HalfInt, &HSeries)> {
        self.terms.iter().map(|(&(j, m), c)| (j, m, c))
    }

    /// Coefficient of `T^j_m` (zero if absent).
    pub fn coeff(&self, j: HalfInt, m: HalfInt) -> HSeries {
        self.terms.get(&(j, m)).cloned().unwrap_or_else(|| HSeries::zero(self.order))
    }

    pub fn add_term(&mut self, j: HalfInt, m: HalfInt, c: &HSeries) -> Result<()> {
        if !j.admits(m) {
            return Err(Error::InvalidWeight { j, m });
        }
        let c = c.truncate(self.order);
        let entry = self.terms.entry((j, m)).or_insert_with(|| HSeries::zero(self.order));
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&(j, m));
        }
        Ok(())
    }

    /// Same element at a different truncation order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (j, m, c) in self.terms() {
            out.add_term(j, m, c).expect("weights already valid");
        }
        out
    }

    pub fn scale_series(&self, s: &HSeries) -> Self {
        let order = self.order.min(s.order());
        let mut out = Self::zero(order);
        for (j, m, c) in self.terms() {
            out.add_term(j, m, &(c * s)).expect("weights already valid");
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        self.scale_series(&HSeries::constant(c, self.order))
    }

    /// Grades `j` present, i.e. half the polynomial degrees.
    pub fn grades(&self) -> BTreeSet<HalfInt> {
        self.terms.keys().map(|&(j, _)| j).collect()
    }

    fn by_grade(&self) -> BTreeMap<HalfInt, Vec<(HalfInt, &HSeries)>> {
        let mut out: BTreeMap<HalfInt, Vec<(HalfInt, &HSeries)>> = BTreeMap::new();
        for (j, m, c) in self.terms() {
            out.entry(j).or_default().push((m, c));
        }
        out
    }

    /// Max-norm of the difference over all terms and coefficients.
    pub fn distance(&self, other: &PlaneElement) -> f64 {
        let diff = self - other;
        diff.terms.values().map(HSeries::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(HSeries::max_abs).fold(0.0, f64::max)
    }

    /// The ħᵏ coefficients as an element with constant (order-0) coefficients.
    pub fn slice(&self, k: usize) -> Self {
        let mut out = Self::zero(0);
        for (j, m, c) in self.terms() {
            out.add_term(j, m, &HSeries::constant(c.coeff(k), 0)).expect("weights already valid");
        }
        out
    }

    /// Classical monomial `c · x^a y^b` in the classical T-normalization.
    pub fn from_classical_monomial(a: u32, b: u32, c: &HSeries) -> Self {
        let (j, m) = monomial_weight(a, b);
        let norm = classical_norm(j, m);
        let mut out = Self::zero(c.order());
        out.add_term(j, m, &c.scale(1.0 / norm)).expect("monomial weight is valid");
        out
    }

    /// Expansion into classical monomials `(a, b, coeff)` of `x^a y^b`.
    pub fn to_classical_monomials(&self) -> Vec<(u32, u32, HSeries)> {
        self.terms()
            .map(|(j, m, c)| {
                let (a, b) = weight_exponents(j, m);
                (a, b, c.scale(classical_norm(j, m)))
            })
            .collect()
    }

    /// Human-readable polynomial of the ħᵏ slice in classical monomials.
    pub fn render_slice(&self, k: usize) -> String {
        let mut monos = self.to_classical_monomials();
        monos.sort_by_key(|&(a, b, _)| (std::cmp::Reverse(a + b), std::cmp::Reverse(a)));
        let monos: Vec<(Vec<(&str, u32)>, f64)> =
            monos.into_iter().map(|(a, b, c)| (vec![("x", a), ("y", b)], c.coeff(k))).collect();
        render_polynomial(&monos)
    }
}

impl std::ops::Add for &PlaneElement {
    type Output = PlaneElement;
    fn add(self, rhs: &PlaneElement) -> PlaneElement {
        let mut out = self.with_order(self.order.min(rhs.order));
        for (j, m, c) in rhs.terms() {
            out.add_term(j, m, c).expect("weights already valid");
        }
        out
    }
}

impl std::ops::Sub for &PlaneElement {
    type Output = PlaneElement;
    fn sub(self, rhs: &PlaneElement) -> PlaneElement {
        let mut out = self.with_order(self.order.min(rhs.order));
        for (j, m, c) in rhs.terms() {
            out.add_term(j, m, &-c).expect("weights already valid");
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct PlaneTermRepr {
    j2: i32,
    m2: i32,
    coeff: HSeries,
}

#[derive(Serialize, Deserialize)]
struct PlaneElementRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    terms: Vec<PlaneTermRepr>,
}

impl Serialize for PlaneElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms =
            self.terms().map(|(j, m, c)| PlaneTermRepr { j2: j.twice(), m2: m.twice(), coeff: c.clone() }).collect();
        PlaneElementRepr { order: Some(self.order), terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlaneElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PlaneElementRepr::deserialize(d)?;
        let order = repr.order.or_else(|| repr.terms.iter().map(|t| t.coeff.order()).min()).unwrap_or(DEFAULT_ORDER);
        let mut out = PlaneElement::zero(order);
        for t in repr.terms {
            out.add_term(HalfInt::from_twice(t.j2), HalfInt::from_twice(t.m2), &t.coeff)
                .map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

/// Renders `Σ c · Π var^power`; terms with |c| < 1e-15 are skipped.
pub(crate) fn render_polynomial(monos: &[(Vec<(&str, u32)>, f64)]) -> String {
    let mut out = String::new();
    for (vars, c) in monos {
        if c.abs() < 1e-15 {
            continue;
        }
        let factors: Vec<String> = vars
            .iter()
            .filter(|(_, p)| *p > 0)
            .map(|(v, p)| if *p == 1 { v.to_string() } else { format!("{v}^{p}") })
            .collect();
        let mag = c.abs();
        let body = match (factors.is_empty(), (mag - 1.0).abs() < 1e-12) {
            (true, _) => format_coeff(mag),
            (false, true) => factors.join("*"),
            (false, false) => format!("{}*{}", format_coeff(mag), factors.join("*")),
        };
        if out.is_empty() {
            if *c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if *c < 0.0 { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Shortest decimal within 12 significant digits.
fn format_coeff(c: f64) -> String {
    let rounded: f64 = format!("{c:.11e}").parse().unwrap_or(c);
    format!("{rounded}")
}

/// `(j, m)` of the monomial `x^a y^b`.
pub fn monomial_weight(a: u32, b: u32) -> (HalfInt, HalfInt) {
    (HalfInt::from_twice((a + b) as i32), HalfInt::from_twice(b as i32 - a as i32))
}

/// `(a, b)` with `T^j_m ∝ x^a y^b`.
pub fn weight_exponents(j: HalfInt, m: HalfInt) -> (u32, u32) {
    ((j - m).to_int().unwrap() as u32, (j + m).to_int().unwrap() as u32)
}

/// `√C(2j, j+m)`, the classical T-basis normalization.
pub(crate) fn classical_norm(j: HalfInt, m: HalfInt) -> f64 {
    let n = j.twice() as u32;
    let k = (j + m).to_int().unwrap() as u32;
    let binom = (1..=k).fold(1.0, |acc, i| acc * f64::from(n - k + i) / f64::from(i));
    binom.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    X,
    Y,
}

/// Normal-ordered monomial `coeff · x^a y^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
    pub coeff: HSeries,
}

/// Parses a word over `{x, y}`.
pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
    word.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'x' => Ok(Letter::X),
            'y' => Ok(Letter::Y),
            other => Err(Error::Parse(format!("unexpected letter `{other}` in plane word"))),
        })
        .collect()
}

/// Reorders a word to `x^a y^b`, picking up `q⁻¹` for every `y` moved past
/// an `x` when deformed.
pub fn plane_normal_form(word: &[Letter], deformed: bool, order: usize) -> Monomial {
    let mut ys_seen = 0i64;
    let mut swaps = 0i64;
    let (mut a, mut b) = (0, 0);
    for l in word {
        match l {
            Letter::X => {
                a += 1;
                swaps += ys_seen;
            }
            Letter::Y => {
                b += 1;
                ys_seen += 1;
            }
        }
    }
    let coeff = if deformed { q_power(-swaps as f64, order) } else { HSeries::one(order) };
    Monomial { a, b, coeff }
}

/// `T^j_m` of the quantum plane as a normal-ordered monomial.
pub fn t_basis(j: HalfInt, m: HalfInt, order: usize) -> Result<Monomial> {
    if !j.admits(m) {
        return Err(Error::InvalidWeight { j, m });
    }
    let (a, b) = weight_exponents(j, m);
    let g = gauss_binomial(j.twice() as i64, (j + m).to_int().unwrap() as i64, -2, order)?;
    Ok(Monomial { a, b, coeff: g.sqrt()? })
}

/// `T^j_m` of the commutative plane.
pub fn t_basis_classical(j: HalfInt, m: HalfInt, order: usize) -> Result<Monomial> {
    if !j.admits(m) {
        return Err(Error::InvalidWeight { j, m });
    }
    let (a, b) = weight_exponents(j, m);
    Ok(Monomial { a, b, coeff: HSeries::constant(classical_norm(j, m), order) })
}

fn bilinear(
    a: &PlaneElement,
    b: &PlaneElement,
    mut pair: impl FnMut(HalfInt, HalfInt, HalfInt, HalfInt, usize) -> Result<HSeries>,
) -> Result<PlaneElement> {
    let order = a.order.min(b.order);
    let mut out = PlaneElement::zero(order);
    for (j1, m1, c1) in a.terms() {
        for (j2, m2, c2) in b.terms() {
            let k = pair(j1, m1, j2, m2, order)?;
            out.add_term(j1 + j2, m1 + m2, &(&(c1 * c2) * &k))?;
        }
    }
    Ok(out)
}

/// Quantum-plane product through the q-Clebsch-Gordan coefficients:
/// `T^{j1}_{m1} T^{j2}_{m2} = qcg(j1 j2 j1+j2; m1 m2 m1+m2) T^{j1+j2}_{m1+m2}`.
pub fn mu_deformed(a: &PlaneElement, b: &PlaneElement) -> PlaneElement {
    bilinear(a, b, |j1, m1, j2, m2, order| qcg(CGQuery::stretched(j1, j2, m1, m2), order))
        .expect("T-basis weights are valid")
}

/// Commutative product through classical Clebsch-Gordan coefficients.
pub fn mu_classical(a: &PlaneElement, b: &PlaneElement) -> PlaneElement {
    bilinear(a, b, |j1, m1, j2, m2, order| Ok(HSeries::constant(cg(CGQuery::stretched(j1, j2, m1, m2))?, order)))
        .expect("T-basis weights are valid")
}

fn monomial_route(a: &PlaneElement, b: &PlaneElement, deformed: bool) -> PlaneElement {
    let basis = |j, m, order| if deformed { t_basis(j, m, order) } else { t_basis_classical(j, m, order) };
    bilinear(a, b, |j1, m1, j2, m2, order| {
        let t1 = basis(j1, m1, order)?;
        let t2 = basis(j2, m2, order)?;
        let mut word = vec![Letter::X; t1.a as usize];
        word.extend(std::iter::repeat_n(Letter::Y, t1.b as usize));
        word.extend(std::iter::repeat_n(Letter::X, t2.a as usize));
        word.extend(std::iter::repeat_n(Letter::Y, t2.b as usize));
        let product = plane_normal_form(&word, deformed, order);
        let target = basis(j1 + j2, m1 + m2, order)?;
        debug_assert_eq!((product.a, product.b), (target.a, target.b));
        (&(&t1.coeff * &t2.coeff) * &product.coeff).div(&target.coeff)
    })
    .expect("T-basis weights are valid")
}

/// Quantum-plane product computed by multiplying monomials, normal
/// ordering with `xy = q yx`, and re-expanding in the T-basis.
pub fn mu_deformed_by_normal_ordering(a: &PlaneElement, b: &PlaneElement) -> PlaneElement {
    monomial_route(a, b, true)
}

/// Commutative product computed on monomials.
pub fn mu_classical_by_monomials(a: &PlaneElement, b: &PlaneElement) -> PlaneElement {
    monomial_route(a, b, false)
}

fn check_family(g: Generator, deformed: bool) -> Result<()> {
    if g.is_deformed() != deformed {
        return Err(Error::MixedFamily(g.to_string(), deformed));
    }
    Ok(())
}

/// Action of a single tensor factor on every homogeneous component.
pub fn act_factor(factor: Factor, a: &PlaneElement) -> PlaneElement {
    let order = a.order;
    let mut out = PlaneElement::zero(order);
    for (j, comps) in a.by_grade() {
        let rho = factor_matrix(j, factor, order);
        let weights: Vec<HalfInt> = j.weights().collect();
        for (m, c) in comps {
            let col = j.weight_index(m);
            for (row, &m_out) in weights.iter().enumerate() {
                let entry = rho.get(row, col);
                if !entry.is_zero() {
                    out.add_term(j, m_out, &(&entry * c)).expect("valid weight");
                }
            }
        }
    }
    out
}

/// `g ▷ a` with `g ▷ T^j_m = Σ_{m'} ρ^j(g)_{m'm} T^j_{m'}`.
pub fn act(g: Generator, a: &PlaneElement, deformed: bool) -> Result<PlaneElement> {
    check_family(g, deformed)?;
    Ok(act_factor(Factor::Gen(g), a))
}

/// Star product `a ⋆ b = μ(F⁻¹ ▷ (a ⊗ b))` for a fixed η, with twist
/// representations cached per spin pair.
pub struct StarProduct {
    eta: EtaFunction,
    order: usize,
    cache: RwLock<HashMap<(HalfInt, HalfInt), Arc<TwistRep>>>,
}

impl StarProduct {
    pub fn new(eta: EtaFunction, order: usize) -> Self {
        StarProduct { eta, order, cache: RwLock::new(HashMap::new()) }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eta(&self) -> &EtaFunction {
        &self.eta
    }

    pub fn twist(&self, j1: HalfInt, j2: HalfInt) -> Result<Arc<TwistRep>> {
        if let Some(t) = self.cache.read().expect("twist cache poisoned").get(&(j1, j2)) {
            return Ok(t.clone());
        }
        let t = Arc::new(twist_rep(j1, j2, &self.eta, self.order)?);
        self.cache.write().expect("twist cache poisoned").insert((j1, j2), t.clone());
        Ok(t)
    }

    pub fn star(&self, a: &PlaneElement, b: &PlaneElement) -> Result<PlaneElement> {
        let order = self.order.min(a.order).min(b.order);
        let mut out = PlaneElement::zero(order);
        for (j1, comp_a) in a.by_grade() {
            for (j2, comp_b) in b.by_grade() {
                let tw = self.twist(j1, j2)?;
                let d2 = j2.dim();
                let mut v = SeriesMatrix::zeros(j1.dim() * d2, 1, order);
                for (m1, c1) in &comp_a {
                    for (m2, c2) in &comp_b {
                        let idx = j1.weight_index(*m1) * d2 + j2.weight_index(*m2);
                        v.set(idx, 0, &(*c1 * *c2));
                    }
                }
                let w = &tw.inverse.matrix.truncate(order) * &v;
                for m1 in j1.weights() {
                    for m2 in j2.weights() {
                        let c = w.get(j1.weight_index(m1) * d2 + j2.weight_index(m2), 0);
                        if c.is_zero() {
                            continue;
                        }
                        let k = cg(CGQuery::stretched(j1, j2, m1, m2))?;
                        out.add_term(j1 + j2, m1 + m2, &c.scale(k))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `B_k(a, b)`: the ħᵏ slice of `a ⋆ b`.
    pub fn bidiff(&self, k: usize, a: &PlaneElement, b: &PlaneElement) -> Result<PlaneElement> {
        let order = self.order.min(a.order).min(b.order);
        if k > order {
            return Err(Error::OrderExceeded { requested: k, order });
        }
        Ok(self.star(a, b)?.slice(k))
    }

    /// Max-norm of `g ▷ (a ⋆ b) − (g_(1) ▷ a) ⋆ (g_(2) ▷ b)` with the deformed coproduct.
    pub fn covariance_residual(&self, g: Generator, a: &PlaneElement, b: &PlaneElement) -> Result<f64> {
        check_family(g, true)?;
        let lhs = act_factor(Factor::Gen(g), &self.star(a, b)?);
        let mut rhs = PlaneElement::zero(lhs.order());
        for (f1, f2) in coproduct_terms(g) {
            rhs = &rhs + &self.star(&act_factor(f1, a), &act_factor(f2, b))?;
        }
        Ok(lhs.distance(&rhs))
    }

    /// Max-norm of `(a ⋆ b) ⋆ c − a ⋆ (b ⋆ c)`.
    pub fn associator_residual(&self, a: &PlaneElement, b: &PlaneElement, c: &PlaneElement) -> Result<f64> {
        let left = self.star(&self.star(a, b)?, c)?;
        let right = self.star(a, &self.star(b, c)?)?;
        Ok(left.distance(&right))
    }
}

fn common_order(elems: &[&PlaneElement]) -> usize {
    elems.iter().map(|e| e.order).min().unwrap_or(DEFAULT_ORDER)
}

pub fn star(a: &PlaneElement, b: &PlaneElement, eta: &EtaFunction) -> Result<PlaneElement> {
    StarProduct::new(eta.clone(), common_order(&[a, b])).star(a, b)
}

pub fn bidiff(k: usize, a: &PlaneElement, b: &PlaneElement, eta: &EtaFunction) -> Result<PlaneElement> {
    StarProduct::new(eta.clone(), common_order(&[a, b])).bidiff(k, a, b)
}

pub fn verify_covariance(g: Generator, a: &PlaneElement, b: &PlaneElement, eta: &EtaFunction) -> Result<f64> {
    StarProduct::new(eta.clone(), common_order(&[a, b])).covariance_residual(g, a, b)
}

pub fn verify_associativity(a: &PlaneElement, b: &PlaneElement, c: &PlaneElement, eta: &EtaFunction) -> Result<f64> {
    StarProduct::new(eta.clone(), common_order(&[a, b, c])).associator_residual(a, b, c)
}

/// All classical monomials `x^a y^b` with `a + b ≤ max_degree`.
pub fn monomials_up_to(max_degree: u32, order: usize) -> Vec<PlaneElement> {
    (0..=max_degree)
        .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
        .map(|(a, b)| PlaneElement::from_classical_monomial(a, b, &HSeries::one(order)))
        .collect()
}
