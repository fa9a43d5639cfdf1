//! Four-dimensional spaces built from two plane factors.
//!
//! A function on 4-space is an element of `X ⊗ X`. For a product `a ⋆ b`
//! the tensor legs are numbered
//!
//! ```text
//! 1 = left factor of a    2 = right factor of a
//! 3 = left factor of b    4 = right factor of b
//! ```
//!
//! The left su(2) copy acts on legs 1 and 3, the right copy on 2 and 4.
//! Euclidean space uses the twist `F₁₃F₂₄`; Minkowski space additionally
//! braids the middle legs, `R⁻¹₂₃F₁₃F₂₄`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::cgc::{cg, CGQuery};
use crate::error::{Error, Result};
use crate::hseries::{q_factorial, q_power, HSeries, HalfInt, DEFAULT_ORDER};
use crate::matrix::SeriesMatrix;
use crate::qplane::{classical_norm, render_polynomial, weight_exponents, PlaneElement, StarProduct};
use crate::reps::{
    coproduct_rep, coproduct_terms, factor_matrix, irrep_generator, k_half_power, opposite_coproduct_rep,
    product_index, Factor, Generator, TensorOp,
};
use crate::twist::EtaFunction;

type Weight = (HalfInt, HalfInt);
/// `(m_left, m_right, coefficient)` inside one grade block.
type WeightedCoeff<'a> = (HalfInt, HalfInt, &'a HSeries);

/// `Σ c · T^j_m ⊗ T^{j′}_{m′}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourElement {
    order: usize,
    terms: BTreeMap<(Weight, Weight), HSeries>,
}

impl FourElement {
    pub fn zero(order: usize) -> Self {
        FourElement { order, terms: BTreeMap::new() }
    }

    pub fn one(order: usize) -> Self {
        Self::tensor(&PlaneElement::one(order), &PlaneElement::one(order))
    }

    /// Decomposable element `a ⊗ b`.
    pub fn tensor(a: &PlaneElement, b: &PlaneElement) -> Self {
        let mut out = Self::zero(a.order().min(b.order()));
        for (j1, m1, c1) in a.terms() {
            for (j2, m2, c2) in b.terms() {
                out.add_term((j1, m1), (j2, m2), &(c1 * c2)).expect("weights already valid");
            }
        }
        out
    }

    /// One of the coordinate functions `x1 = x⊗1`, `y1 = y⊗1`, `x2 = 1⊗x`, `y2 = 1⊗y`.
    pub fn coordinate(name: &str, order: usize) -> Result<Self> {
        let (one, x, y) = (PlaneElement::one(order), PlaneElement::x(order), PlaneElement::y(order));
        Ok(match name {
            "x1" => Self::tensor(&x, &one),
            "y1" => Self::tensor(&y, &one),
            "x2" => Self::tensor(&one, &x),
            "y2" => Self::tensor(&one, &y),
            other => return Err(Error::Parse(format!("unknown 4-space coordinate `{other}`"))),
        })
    }

    pub fn coordinates(order: usize) -> Vec<Self> {
        ["x1", "y1", "x2", "y2"].iter().map(|n| Self::coordinate(n, order).unwrap()).collect()
    }

    /// `c · x1^a1 y1^b1 x2^a2 y2^b2` in the classical normalization.
    pub fn from_classical_monomial(exps: [u32; 4], c: &HSeries) -> Self {
        let left = PlaneElement::from_classical_monomial(exps[0], exps[1], c);
        let right = PlaneElement::from_classical_monomial(exps[2], exps[3], &HSeries::one(c.order()));
        Self::tensor(&left, &right)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Weight, Weight, &HSeries)> {
        self.terms.iter().map(|(&(l, r), c)| (l, r, c))
    }

    pub fn add_term(&mut self, left: Weight, right: Weight, c: &HSeries) -> Result<()> {
        for (j, m) in [left, right] {
            if !j.admits(m) {
                return Err(Error::InvalidWeight { j, m });
            }
        }
        let c = c.truncate(self.order);
        let entry = self.terms.entry((left, right)).or_insert_with(|| HSeries::zero(self.order));
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&(left, right));
        }
        Ok(())
    }

    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (l, r, c) in self.terms() {
            out.add_term(l, r, c).expect("weights already valid");
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.order);
        for (l, r, s) in self.terms() {
            out.add_term(l, r, &s.scale(c)).expect("weights already valid");
        }
        out
    }

    pub fn distance(&self, other: &FourElement) -> f64 {
        (self - other).max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(HSeries::max_abs).fold(0.0, f64::max)
    }

    /// The ħᵏ coefficients with constant (order-0) coefficients.
    pub fn slice(&self, k: usize) -> Self {
        let mut out = Self::zero(0);
        for (l, r, c) in self.terms() {
            out.add_term(l, r, &HSeries::constant(c.coeff(k), 0)).expect("weights already valid");
        }
        out
    }

    fn by_grades(&self) -> BTreeMap<(HalfInt, HalfInt), Vec<WeightedCoeff<'_>>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for ((jl, ml), (jr, mr), c) in self.terms() {
            out.entry((jl, jr)).or_default().push((ml, mr, c));
        }
        out
    }

    /// Expansion into classical monomials `x1^a1 y1^b1 x2^a2 y2^b2`.
    pub fn to_classical_monomials(&self) -> Vec<([u32; 4], HSeries)> {
        self.terms()
            .map(|((jl, ml), (jr, mr), c)| {
                let (a1, b1) = weight_exponents(jl, ml);
                let (a2, b2) = weight_exponents(jr, mr);
                let norm = classical_norm(jl, ml) * classical_norm(jr, mr);
                ([a1, b1, a2, b2], c.scale(norm))
            })
            .collect()
    }

    /// Human-readable polynomial of the ħᵏ slice.
    pub fn render_slice(&self, k: usize) -> String {
        let mut monos = self.to_classical_monomials();
        monos.sort_by_key(|(e, _)| (std::cmp::Reverse(e.iter().sum::<u32>()), std::cmp::Reverse(*e)));
        let monos: Vec<(Vec<(&str, u32)>, f64)> = monos
            .into_iter()
            .map(|(e, c)| (vec![("x1", e[0]), ("y1", e[1]), ("x2", e[2]), ("y2", e[3])], c.coeff(k)))
            .collect();
        render_polynomial(&monos)
    }
}

impl std::ops::Add for &FourElement {
    type Output = FourElement;
    fn add(self, rhs: &FourElement) -> FourElement {
        let mut out = self.with_order(self.order.min(rhs.order));
        for (l, r, c) in rhs.terms() {
            out.add_term(l, r, c).expect("weights already valid");
        }
        out
    }
}

impl std::ops::Sub for &FourElement {
    type Output = FourElement;
    fn sub(self, rhs: &FourElement) -> FourElement {
        let mut out = self.with_order(self.order.min(rhs.order));
        for (l, r, c) in rhs.terms() {
            out.add_term(l, r, &-c).expect("weights already valid");
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct FourTermRepr {
    j2: [i32; 2],
    m2: [i32; 2],
    coeff: HSeries,
}

#[derive(Serialize, Deserialize)]
struct FourElementRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    terms: Vec<FourTermRepr>,
}

impl Serialize for FourElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|((jl, ml), (jr, mr), c)| FourTermRepr {
                j2: [jl.twice(), jr.twice()],
                m2: [ml.twice(), mr.twice()],
                coeff: c.clone(),
            })
            .collect();
        FourElementRepr { order: Some(self.order), terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FourElementRepr::deserialize(d)?;
        let order = repr.order.or_else(|| repr.terms.iter().map(|t| t.coeff.order()).min()).unwrap_or(DEFAULT_ORDER);
        let mut out = FourElement::zero(order);
        for t in repr.terms {
            let left = (HalfInt::from_twice(t.j2[0]), HalfInt::from_twice(t.m2[0]));
            let right = (HalfInt::from_twice(t.j2[1]), HalfInt::from_twice(t.m2[1]));
            out.add_term(left, right, &t.coeff).map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Euclidean,
    Minkowski,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Euclidean => "euclid",
            Variant::Minkowski => "minkowski",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclid" | "euclidean" => Ok(Variant::Euclidean),
            "minkowski" => Ok(Variant::Minkowski),
            other => Err(Error::Parse(format!("unknown 4-space variant `{other}`"))),
        }
    }
}

/// Which su(2) copy of so(4) acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegCopy {
    Left,
    Right,
}

/// `(ρ^{j1} ⊗ ρ^{j2})(R)` and its inverse.
#[derive(Clone, Debug, Serialize)]
pub struct RMatrixRep {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub matrix: TensorOp,
    pub inverse: TensorOp,
}

impl RMatrixRep {
    pub fn inverse_residual(&self) -> f64 {
        let n = self.matrix.dim();
        let prod = &self.matrix.matrix * &self.inverse.matrix;
        prod.distance(&SeriesMatrix::identity(n, prod.order()))
    }
}

/// `R = q^{H⊗H/2} Σ_n q^{n(n−1)/2} (q − q⁻¹)ⁿ / [n]! · (K^{1/2}E)ⁿ ⊗ (FK^{−1/2})ⁿ`.
///
/// `K^{1/2}E` and `FK^{−1/2}` are the generators whose coproducts take the
/// asymmetric form `E⊗K + 1⊗E`, `F⊗1 + K⁻¹⊗F`.
pub fn r_matrix_rep(j1: HalfInt, j2: HalfInt, order: usize) -> Result<RMatrixRep> {
    let e = &k_half_power(j1, 1, order) * &irrep_generator(j1, Generator::E, order).matrix;
    let f = &irrep_generator(j2, Generator::F, order).matrix * &k_half_power(j2, -1, order);
    let n = j1.dim() * j2.dim();
    let q_diff = &q_power(1.0, order) - &q_power(-1.0, order);

    let mut sum = SeriesMatrix::zeros(n, n, order);
    let mut e_pow = SeriesMatrix::identity(j1.dim(), order);
    let mut f_pow = SeriesMatrix::identity(j2.dim(), order);
    for k in 0..j1.dim().min(j2.dim()) as u32 {
        let c =
            (q_power(f64::from(k * k.saturating_sub(1)) / 2.0, order) * q_diff.powi(k)).div(&q_factorial(k, order))?;
        sum = sum + e_pow.kron(&f_pow).scale_series(&c);
        e_pow = &e_pow * &e;
        f_pow = &f_pow * &f;
    }
    let cartan: Vec<HSeries> = j1
        .weights()
        .flat_map(|m1| j2.weights().map(move |m2| (m1, m2)))
        .map(|(m1, m2)| q_power(2.0 * m1.as_f64() * m2.as_f64(), order))
        .collect();
    let matrix = &SeriesMatrix::diagonal(&cartan, order) * &sum;
    let inverse = matrix.inverse()?;
    Ok(RMatrixRep {
        j1,
        j2,
        matrix: TensorOp::new(vec![j1, j2], matrix),
        inverse: TensorOp::new(vec![j1, j2], inverse),
    })
}

/// Max-norm of `R·Δ_ħ(g) − Δ_ħ^op(g)·R`.
pub fn verify_r_intertwining(j1: HalfInt, j2: HalfInt, g: Generator, order: usize) -> Result<f64> {
    let r = r_matrix_rep(j1, j2, order)?.matrix.matrix;
    let d = coproduct_rep(j1, j2, g, true, order)?.matrix;
    let dop = opposite_coproduct_rep(j1, j2, g, order)?.matrix;
    Ok((&r * &d).distance(&(&dop * &r)))
}

/// Max-norm of `R₁₂R₁₃R₂₃ − R₂₃R₁₃R₁₂` on `V_{j1} ⊗ V_{j2} ⊗ V_{j3}`.
pub fn verify_yang_baxter(j1: HalfInt, j2: HalfInt, j3: HalfInt, order: usize) -> Result<f64> {
    let dims = [j1.dim(), j2.dim(), j3.dim()];
    let r12 = r_matrix_rep(j1, j2, order)?.matrix.matrix.embed_legs(&dims, &[0, 1]);
    let r13 = r_matrix_rep(j1, j3, order)?.matrix.matrix.embed_legs(&dims, &[0, 2]);
    let r23 = r_matrix_rep(j2, j3, order)?.matrix.matrix.embed_legs(&dims, &[1, 2]);
    Ok((&(&r12 * &r13) * &r23).distance(&(&(&r23 * &r13) * &r12)))
}

/// Star products on 4-space with cached twist and R-matrix blocks.
pub struct Star4 {
    variant: Variant,
    plane: StarProduct,
    r_cache: RwLock<HashMap<(HalfInt, HalfInt), Arc<RMatrixRep>>>,
    inverse_cache: RwLock<HashMap<[HalfInt; 4], Arc<SeriesMatrix>>>,
}

impl Star4 {
    pub fn new(variant: Variant, eta: EtaFunction, order: usize) -> Self {
        Star4 {
            variant,
            plane: StarProduct::new(eta, order),
            r_cache: RwLock::new(HashMap::new()),
            inverse_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn order(&self) -> usize {
        self.plane.order()
    }

    fn r_matrix(&self, j1: HalfInt, j2: HalfInt) -> Result<Arc<RMatrixRep>> {
        if let Some(r) = self.r_cache.read().expect("R cache poisoned").get(&(j1, j2)) {
            return Ok(r.clone());
        }
        let r = Arc::new(r_matrix_rep(j1, j2, self.order())?);
        self.r_cache.write().expect("R cache poisoned").insert((j1, j2), r.clone());
        Ok(r)
    }

    /// The composite twist on `V_{j1} ⊗ V_{j2} ⊗ V_{j3} ⊗ V_{j4}`.
    pub fn composite_twist(&self, spins: [HalfInt; 4]) -> Result<TensorOp> {
        let dims = spins.map(HalfInt::dim);
        let f13 = self.plane.twist(spins[0], spins[2])?.forward.matrix.embed_legs(&dims, &[0, 2]);
        let f24 = self.plane.twist(spins[1], spins[3])?.forward.matrix.embed_legs(&dims, &[1, 3]);
        let mut f = &f13 * &f24;
        if self.variant == Variant::Minkowski {
            let r23_inv = self.r_matrix(spins[1], spins[2])?.inverse.matrix.embed_legs(&dims, &[1, 2]);
            f = &r23_inv * &f;
        }
        Ok(TensorOp::new(spins.to_vec(), f))
    }

    /// Inverse of [`Star4::composite_twist`], assembled from the factor inverses.
    pub fn composite_twist_inverse(&self, spins: [HalfInt; 4]) -> Result<Arc<SeriesMatrix>> {
        if let Some(m) = self.inverse_cache.read().expect("twist cache poisoned").get(&spins) {
            return Ok(m.clone());
        }
        let dims = spins.map(HalfInt::dim);
        let f13_inv = self.plane.twist(spins[0], spins[2])?.inverse.matrix.embed_legs(&dims, &[0, 2]);
        let f24_inv = self.plane.twist(spins[1], spins[3])?.inverse.matrix.embed_legs(&dims, &[1, 3]);
        let mut inv = &f24_inv * &f13_inv;
        if self.variant == Variant::Minkowski {
            let r23 = self.r_matrix(spins[1], spins[2])?.matrix.matrix.embed_legs(&dims, &[1, 2]);
            inv = &inv * &r23;
        }
        let inv = Arc::new(inv);
        self.inverse_cache.write().expect("twist cache poisoned").insert(spins, inv.clone());
        Ok(inv)
    }

    pub fn star(&self, a: &FourElement, b: &FourElement) -> Result<FourElement> {
        let order = self.order().min(a.order).min(b.order);
        let mut out = FourElement::zero(order);
        for ((j1, j2), comp_a) in a.by_grades() {
            for ((j3, j4), comp_b) in b.by_grades() {
                let spins = [j1, j2, j3, j4];
                let inv = self.composite_twist_inverse(spins)?;
                let n = spins.iter().map(|j| j.dim()).product();
                let mut v = SeriesMatrix::zeros(n, 1, order);
                for (m1, m2, ca) in &comp_a {
                    for (m3, m4, cb) in &comp_b {
                        v.set(product_index(&spins, &[*m1, *m2, *m3, *m4]), 0, &(*ca * *cb));
                    }
                }
                let w = &inv.truncate(order) * &v;
                for m1 in j1.weights() {
                    for m2 in j2.weights() {
                        for m3 in j3.weights() {
                            let c13 = cg(CGQuery::stretched(j1, j3, m1, m3))?;
                            for m4 in j4.weights() {
                                let c = w.get(product_index(&spins, &[m1, m2, m3, m4]), 0);
                                if c.is_zero() {
                                    continue;
                                }
                                let c24 = cg(CGQuery::stretched(j2, j4, m2, m4))?;
                                out.add_term((j1 + j3, m1 + m3), (j2 + j4, m2 + m4), &c.scale(c13 * c24))?;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn associator_residual(&self, a: &FourElement, b: &FourElement, c: &FourElement) -> Result<f64> {
        let left = self.star(&self.star(a, b)?, c)?;
        let right = self.star(a, &self.star(b, c)?)?;
        Ok(left.distance(&right))
    }

    /// Covariance under one su(2) copy; Euclidean only.
    pub fn covariance_residual(&self, g: Generator, copy: LegCopy, a: &FourElement, b: &FourElement) -> Result<f64> {
        if self.variant != Variant::Euclidean {
            return Err(Error::UnsupportedGenerator(format!(
                "covariance under {g} is only checked on euclid space, not {}",
                self.variant
            )));
        }
        if !g.is_deformed() {
            return Err(Error::MixedFamily(g.to_string(), true));
        }
        let lhs = act_copy(Factor::Gen(g), copy, &self.star(a, b)?);
        let mut rhs = FourElement::zero(lhs.order);
        for (f1, f2) in coproduct_terms(g) {
            rhs = &rhs + &self.star(&act_copy(f1, copy, a), &act_copy(f2, copy, b))?;
        }
        Ok(lhs.distance(&rhs))
    }
}

/// Action of a factor through one su(2) copy, i.e. on one plane factor.
pub fn act_copy(factor: Factor, copy: LegCopy, a: &FourElement) -> FourElement {
    let mut out = FourElement::zero(a.order);
    for ((jl, ml), (jr, mr), c) in a.terms() {
        let (j, m) = match copy {
            LegCopy::Left => (jl, ml),
            LegCopy::Right => (jr, mr),
        };
        let rho = factor_matrix(j, factor, a.order);
        let col = j.weight_index(m);
        for (row, m_out) in j.weights().enumerate() {
            let entry = rho.get(row, col);
            if entry.is_zero() {
                continue;
            }
            let (l, r) = match copy {
                LegCopy::Left => ((jl, m_out), (jr, mr)),
                LegCopy::Right => ((jl, ml), (jr, m_out)),
            };
            out.add_term(l, r, &(&entry * c)).expect("valid weight");
        }
    }
    out
}

fn common_order(elems: &[&FourElement]) -> usize {
    elems.iter().map(|e| e.order).min().unwrap_or(DEFAULT_ORDER)
}

pub fn composite_twist(variant: Variant, spins: [HalfInt; 4], eta: &EtaFunction, order: usize) -> Result<TensorOp> {
    Star4::new(variant, eta.clone(), order).composite_twist(spins)
}

pub fn star4(a: &FourElement, b: &FourElement, variant: Variant, eta: &EtaFunction) -> Result<FourElement> {
    Star4::new(variant, eta.clone(), common_order(&[a, b])).star(a, b)
}

pub fn verify_associativity4(
    a: &FourElement,
    b: &FourElement,
    c: &FourElement,
    variant: Variant,
    eta: &EtaFunction,
) -> Result<f64> {
    Star4::new(variant, eta.clone(), common_order(&[a, b, c])).associator_residual(a, b, c)
}

pub fn verify_covariance4(
    g: Generator,
    copy: LegCopy,
    a: &FourElement,
    b: &FourElement,
    eta: &EtaFunction,
) -> Result<f64> {
    Star4::new(Variant::Euclidean, eta.clone(), common_order(&[a, b])).covariance_residual(g, copy, a, b)
}

/// All decomposable monomials with per-factor degree `≤ max_degree`.
pub fn monomials_up_to(max_degree: u32, order: usize) -> Vec<FourElement> {
    let plane = crate::qplane::monomials_up_to(max_degree, order);
    plane.iter().flat_map(|l| plane.iter().map(move |r| FourElement::tensor(l, r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qplane::{mu_classical, star};

    const K: usize = 6;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn r_matrix_basics() {
        for t in 0..=3 {
            let r = r_matrix_rep(h(0), h(t), K).unwrap();
            assert!(r.matrix.matrix.distance(&SeriesMatrix::identity(h(t).dim(), K)) < 1e-15);
        }
        let r = r_matrix_rep(h(1), h(1), K).unwrap();
        assert!((r.matrix.matrix.constant_term() - nalgebra::DMatrix::identity(4, 4)).amax() < 1e-15);
        assert!(r.inverse_residual() < 1e-12);
    }

    #[test]
    fn r_matrix_intertwines() {
        for t1 in 0..=2 {
            for t2 in 0..=2 {
                for g in Generator::DEFORMED {
                    let r = verify_r_intertwining(h(t1), h(t2), g, K).unwrap();
                    assert!(r < 1e-9, "{t1} {t2} {g}: {r:e}");
                }
            }
        }
    }

    #[test]
    fn yang_baxter() {
        assert!(verify_yang_baxter(h(1), h(1), h(1), K).unwrap() < 1e-9);
        assert!(verify_yang_baxter(h(2), h(1), h(2), 4).unwrap() < 1e-9);
    }

    #[test]
    fn disjoint_twists_commute() {
        let sp = StarProduct::new(EtaFunction::one(), 4);
        let spins = [h(1), h(2), h(1), h(1)];
        let dims = spins.map(HalfInt::dim);
        let f13 = sp.twist(spins[0], spins[2]).unwrap().forward.matrix.embed_legs(&dims, &[0, 2]);
        let f24 = sp.twist(spins[1], spins[3]).unwrap().forward.matrix.embed_legs(&dims, &[1, 3]);
        assert!((&f13 * &f24).distance(&(&f24 * &f13)) < 1e-12);
    }

    #[test]
    fn composite_twist_examples() {
        let eta = EtaFunction::one();
        let f = composite_twist(Variant::Euclidean, [h(0); 4], &eta, K).unwrap();
        assert!(f.matrix.distance(&SeriesMatrix::identity(1, K)) < 1e-15);

        // legs (1,3),(2,4) reordered to (1,2),(3,4) is the Kronecker product
        let spins = [h(1); 4];
        let f = composite_twist(Variant::Euclidean, spins, &eta, K).unwrap();
        let tw = crate::twist::twist_rep(h(1), h(1), &eta, K).unwrap().forward.matrix;
        let p = SeriesMatrix::leg_permutation(&[2, 2, 2, 2], &[0, 2, 1, 3], K);
        let reordered = &(&p * &tw.kron(&tw)) * &p.transpose();
        assert!(f.matrix.distance(&reordered) < 1e-12);

        let f = composite_twist(Variant::Minkowski, [h(0), h(1), h(1), h(0)], &eta, K).unwrap();
        let r_inv = r_matrix_rep(h(1), h(1), K).unwrap().inverse.matrix;
        assert!(f.matrix.distance(&r_inv) < 1e-12);

        for variant in [Variant::Euclidean, Variant::Minkowski] {
            let f = composite_twist(variant, [h(1), h(2), h(1), h(2)], &eta, K).unwrap();
            assert!((f.matrix.constant_term() - nalgebra::DMatrix::identity(36, 36)).amax() < 1e-12);
        }
    }

    #[test]
    fn unit_laws() {
        for variant in [Variant::Euclidean, Variant::Minkowski] {
            let s = Star4::new(variant, EtaFunction::one(), K);
            for c in FourElement::coordinates(K) {
                assert!(s.star(&FourElement::one(K), &c).unwrap().distance(&c) < 1e-14);
                assert!(s.star(&c, &FourElement::one(K)).unwrap().distance(&c) < 1e-14);
            }
        }
    }

    #[test]
    fn euclidean_factorizes() {
        let eta = EtaFunction::one();
        let s = Star4::new(Variant::Euclidean, eta.clone(), K);
        let planes = crate::qplane::monomials_up_to(2, K);
        for a in &planes {
            for b in &planes {
                for (a2, b2) in [(&planes[0], &planes[1]), (&planes[2], &planes[4]), (a, b)] {
                    let lhs = s.star(&FourElement::tensor(a, a2), &FourElement::tensor(b, b2)).unwrap();
                    let rhs = FourElement::tensor(&star(a, b, &eta).unwrap(), &star(a2, b2, &eta).unwrap());
                    assert!(lhs.distance(&rhs) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn minkowski_braids_the_factors() {
        let s = Star4::new(Variant::Minkowski, EtaFunction::one(), K);
        let (x1, x2) = (FourElement::coordinate("x1", K).unwrap(), FourElement::coordinate("x2", K).unwrap());
        // legs 2 and 3 carry spin 0 here, so R₂₃ is trivial
        let forward = s.star(&x1, &x2).unwrap();
        assert!(forward.slice(1).max_abs() < 1e-15);
        let backward = s.star(&x2, &x1).unwrap();
        assert!(backward.slice(1).max_abs() > 0.1);
        assert!(backward.slice(0).distance(&forward.slice(0)) < 1e-12);
        let e = Star4::new(Variant::Euclidean, EtaFunction::one(), K);
        assert!(e.star(&x2, &x1).unwrap().slice(1).max_abs() < 1e-15);
    }

    #[test]
    fn associativity_on_coordinates() {
        for variant in [Variant::Euclidean, Variant::Minkowski] {
            let s = Star4::new(variant, EtaFunction::one(), 4);
            let coords = FourElement::coordinates(4);
            for a in &coords {
                for b in &coords {
                    for c in &coords {
                        let r = s.associator_residual(a, b, c).unwrap();
                        assert!(r < 1e-9, "{variant}: {r:e}");
                    }
                }
            }
            let one = FourElement::one(4);
            assert!(s.associator_residual(&one, &coords[0], &coords[3]).unwrap() < 1e-15);
        }
    }

    #[test]
    fn classical_limit_is_commutative() {
        for variant in [Variant::Euclidean, Variant::Minkowski] {
            let s = Star4::new(variant, EtaFunction::one(), 3);
            let elems = monomials_up_to(1, 3);
            for a in &elems {
                for b in &elems {
                    let ab = s.star(a, b).unwrap().slice(0);
                    let ba = s.star(b, a).unwrap().slice(0);
                    assert!(ab.distance(&ba) < 1e-12);
                }
            }
        }
        let (x, y) = (PlaneElement::x(2), PlaneElement::y(2));
        let lhs =
            star4(&FourElement::tensor(&x, &y), &FourElement::tensor(&y, &x), Variant::Euclidean, &EtaFunction::one())
                .unwrap()
                .slice(0);
        let rhs = FourElement::tensor(&mu_classical(&x, &y), &mu_classical(&y, &x)).slice(0);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let eta = EtaFunction::one();
        let one = FourElement::one(K);
        let c = |n| FourElement::coordinate(n, K).unwrap();
        assert!(verify_covariance4(Generator::K, LegCopy::Left, &one, &one, &eta).unwrap() < 1e-15);
        assert!(verify_covariance4(Generator::E, LegCopy::Left, &c("x1"), &c("y1"), &eta).unwrap() < 1e-9);
        assert!(verify_covariance4(Generator::F, LegCopy::Right, &c("x2"), &c("y2"), &eta).unwrap() < 1e-9);
        assert!(verify_covariance4(Generator::E, LegCopy::Right, &c("y1"), &c("x2"), &eta).unwrap() < 1e-9);
        let m = Star4::new(Variant::Minkowski, eta, K);
        assert!(m.covariance_residual(Generator::E, LegCopy::Left, &one, &one).is_err());
    }

    #[test]
    fn rendering_and_json() {
        let e = &FourElement::coordinate("x1", 2).unwrap()
            + &FourElement::from_classical_monomial([0, 1, 2, 0], &HSeries::constant(2.0, 2));
        assert_eq!(e.render_slice(0), "2*y1*x2^2 + x1");
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["terms"][0]["j2"], serde_json::json!([1, 0]));
        let back: FourElement = serde_json::from_value(v).unwrap();
        assert!(back.distance(&e) < 1e-15);
    }
}
