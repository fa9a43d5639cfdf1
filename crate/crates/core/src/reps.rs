//! Spin-j representations of the deformed and undeformed enveloping
//! algebra of su(2), and their coproducts on tensor products.
//!
//! Conventions, on the weight basis `v_m`, `m = −j … j` ascending:
//!
//! ```text
//! E v_m = √([j−m][j+m+1]) v_{m+1}     e v_m = √((j−m)(j+m+1)) v_{m+1}
//! F v_m = √([j+m][j−m+1]) v_{m−1}     f v_m = √((j+m)(j−m+1)) v_{m−1}
//! K v_m = q^{2m} v_m                  h v_m = 2m v_m
//!
//! Δ_ħ(E) = E ⊗ K^{1/2} + K^{−1/2} ⊗ E
//! Δ_ħ(F) = F ⊗ K^{1/2} + K^{−1/2} ⊗ F
//! Δ_ħ(K) = K ⊗ K
//! Δ(g)   = g ⊗ 1 + 1 ⊗ g            (g ∈ {e, f, h})
//! ```
//!
//! The symmetric form of `Δ_ħ` is the one for which the q-Clebsch-Gordan
//! matrices are orthogonal and the quantum plane `xy = q yx` is a module
//! algebra in the T-basis.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hseries::{q_integer, q_power, HSeries, HalfInt};
use crate::matrix::SeriesMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    E,
    F,
    K,
    KInv,
    /// undeformed raising operator `e`
    LowE,
    /// undeformed lowering operator `f`
    LowF,
    /// undeformed Cartan element `h`
    LowH,
}

impl Generator {
    pub const DEFORMED: [Generator; 4] = [Generator::E, Generator::F, Generator::K, Generator::KInv];
    pub const UNDEFORMED: [Generator; 3] = [Generator::LowE, Generator::LowF, Generator::LowH];

    pub fn is_deformed(self) -> bool {
        matches!(self, Generator::E | Generator::F | Generator::K | Generator::KInv)
    }

    /// Undeformed partner: E ↔ e, F ↔ f, K^{±1} ↔ h (through K = exp(ħh)).
    pub fn partner(self) -> Generator {
        match self {
            Generator::E => Generator::LowE,
            Generator::F => Generator::LowF,
            Generator::K | Generator::KInv => Generator::LowH,
            Generator::LowE => Generator::E,
            Generator::LowF => Generator::F,
            Generator::LowH => Generator::K,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::E => "E",
            Generator::F => "F",
            Generator::K => "K",
            Generator::KInv => "Kinv",
            Generator::LowE => "e",
            Generator::LowF => "f",
            Generator::LowH => "h",
        };
        f.write_str(s)
    }
}

impl FromStr for Generator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "E" => Generator::E,
            "F" => Generator::F,
            "K" => Generator::K,
            "Kinv" => Generator::KInv,
            "e" => Generator::LowE,
            "f" => Generator::LowF,
            "h" => Generator::LowH,
            other => return Err(Error::Parse(format!("unknown generator `{other}`"))),
        })
    }
}

/// One tensor factor of a coproduct term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Identity,
    Gen(Generator),
    /// `K^{n/2}`, acting as `q^{n m}` on `v_m`
    KHalfPow(i32),
}

/// Matrix of a spin-`j` representation on the ascending weight basis.
#[derive(Clone, Debug, Serialize)]
pub struct RepMatrix {
    pub spin: HalfInt,
    pub matrix: SeriesMatrix,
}

/// Operator on `V_{j1} ⊗ … ⊗ V_{jn}`, row-major in factor order.
#[derive(Clone, Debug, Serialize)]
pub struct TensorOp {
    pub factor_spins: Vec<HalfInt>,
    pub matrix: SeriesMatrix,
}

impl TensorOp {
    pub fn new(factor_spins: Vec<HalfInt>, matrix: SeriesMatrix) -> Self {
        debug_assert_eq!(factor_spins.iter().map(|j| j.dim()).product::<usize>(), matrix.rows());
        TensorOp { factor_spins, matrix }
    }

    pub fn identity(factor_spins: Vec<HalfInt>, order: usize) -> Self {
        let n = factor_spins.iter().map(|j| j.dim()).product();
        TensorOp { factor_spins, matrix: SeriesMatrix::identity(n, order) }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factor_spins.iter().map(|j| j.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Flat index of the product weight `(m_1, …, m_n)`.
    pub fn index_of(&self, ms: &[HalfInt]) -> usize {
        product_index(&self.factor_spins, ms)
    }
}

/// Flat row-major index of `(m_1, …, m_n)` in `V_{j_1} ⊗ … ⊗ V_{j_n}`.
pub fn product_index(spins: &[HalfInt], ms: &[HalfInt]) -> usize {
    spins.iter().zip(ms).fold(0, |acc, (j, m)| acc * j.dim() + j.weight_index(*m))
}

/// All product weights in row-major order.
pub fn product_weights(spins: &[HalfInt]) -> Vec<Vec<HalfInt>> {
    spins.iter().fold(vec![Vec::new()], |acc, j| {
        acc.into_iter()
            .flat_map(|prefix| {
                j.weights().map(move |m| {
                    let mut v = prefix.clone();
                    v.push(m);
                    v
                })
            })
            .collect()
    })
}

fn ladder(j: HalfInt, order: usize, deformed: bool, raising: bool) -> SeriesMatrix {
    let n = j.dim();
    let mut out = SeriesMatrix::zeros(n, n, order);
    for m in j.weights() {
        let target = if raising { m + HalfInt::ONE } else { m - HalfInt::ONE };
        if !j.admits(target) {
            continue;
        }
        // (j−m)(j+m+1) for raising, (j+m)(j−m+1) for lowering
        let (a, b) = if raising {
            ((j - m).to_int().unwrap(), (j + m).to_int().unwrap() + 1)
        } else {
            ((j + m).to_int().unwrap(), (j - m).to_int().unwrap() + 1)
        };
        let entry = if deformed {
            (q_integer(a as i64, order) * q_integer(b as i64, order)).sqrt().expect("ladder coefficient is positive")
        } else {
            HSeries::constant(((a * b) as f64).sqrt(), order)
        };
        out.set(j.weight_index(target), j.weight_index(m), &entry);
    }
    out
}

/// `K^{n/2}` on `V_j`: diag(q^{n m}).
pub fn k_half_power(j: HalfInt, n: i32, order: usize) -> SeriesMatrix {
    let diag: Vec<HSeries> = j.weights().map(|m| q_power(n as f64 * m.as_f64(), order)).collect();
    SeriesMatrix::diagonal(&diag, order)
}

/// `ρ^j(g)`; the family is fixed by the generator tag.
pub fn irrep_generator(j: HalfInt, g: Generator, order: usize) -> RepMatrix {
    let matrix = match g {
        Generator::E => ladder(j, order, true, true),
        Generator::F => ladder(j, order, true, false),
        Generator::K => k_half_power(j, 2, order),
        Generator::KInv => k_half_power(j, -2, order),
        Generator::LowE => ladder(j, order, false, true),
        Generator::LowF => ladder(j, order, false, false),
        Generator::LowH => {
            let diag: Vec<HSeries> = j.weights().map(|m| HSeries::constant(2.0 * m.as_f64(), order)).collect();
            SeriesMatrix::diagonal(&diag, order)
        }
    };
    RepMatrix { spin: j, matrix }
}

pub fn factor_matrix(j: HalfInt, factor: Factor, order: usize) -> SeriesMatrix {
    match factor {
        Factor::Identity => SeriesMatrix::identity(j.dim(), order),
        Factor::Gen(g) => irrep_generator(j, g, order).matrix,
        Factor::KHalfPow(n) => k_half_power(j, n, order),
    }
}

/// Sweedler terms `g_(1) ⊗ g_(2)` of the coproduct of `g`.
pub fn coproduct_terms(g: Generator) -> Vec<(Factor, Factor)> {
    use Factor::*;
    match g {
        Generator::E | Generator::F => vec![(Gen(g), KHalfPow(1)), (KHalfPow(-1), Gen(g))],
        Generator::K => vec![(KHalfPow(2), KHalfPow(2))],
        Generator::KInv => vec![(KHalfPow(-2), KHalfPow(-2))],
        Generator::LowE | Generator::LowF | Generator::LowH => vec![(Gen(g), Identity), (Identity, Gen(g))],
    }
}

fn coproduct_from_terms(j1: HalfInt, j2: HalfInt, terms: &[(Factor, Factor)], order: usize) -> SeriesMatrix {
    let n = j1.dim() * j2.dim();
    terms.iter().fold(SeriesMatrix::zeros(n, n, order), |acc, (a, b)| {
        acc + factor_matrix(j1, *a, order).kron(&factor_matrix(j2, *b, order))
    })
}

/// `(ρ^{j1} ⊗ ρ^{j2})(Δ(g))`, deformed or undeformed.
pub fn coproduct_rep(j1: HalfInt, j2: HalfInt, g: Generator, deformed: bool, order: usize) -> Result<TensorOp> {
    if g.is_deformed() != deformed {
        return Err(Error::MixedFamily(g.to_string(), deformed));
    }
    Ok(TensorOp::new(vec![j1, j2], coproduct_from_terms(j1, j2, &coproduct_terms(g), order)))
}

/// `(ρ^{j1} ⊗ ρ^{j2})(Δ^op_ħ(g))`, the flipped deformed coproduct.
pub fn opposite_coproduct_rep(j1: HalfInt, j2: HalfInt, g: Generator, order: usize) -> Result<TensorOp> {
    if !g.is_deformed() {
        return Err(Error::MixedFamily(g.to_string(), true));
    }
    let flipped: Vec<_> = coproduct_terms(g).into_iter().map(|(a, b)| (b, a)).collect();
    Ok(TensorOp::new(vec![j1, j2], coproduct_from_terms(j1, j2, &flipped, order)))
}

fn commutator(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    &(a * b) - &(b * a)
}

/// `diag([2m])` on the given weights, i.e. `(K − K⁻¹)/(q − q⁻¹)`.
fn cartan_q_number(weights: impl Iterator<Item = HalfInt>, order: usize) -> SeriesMatrix {
    let diag: Vec<HSeries> = weights.map(|m| q_integer(m.twice() as i64, order)).collect();
    SeriesMatrix::diagonal(&diag, order)
}

/// Max residual of the defining relations of the deformed algebra on `V_j`.
pub fn verify_irrep_relations(j: HalfInt, order: usize) -> f64 {
    let e = irrep_generator(j, Generator::E, order).matrix;
    let f = irrep_generator(j, Generator::F, order).matrix;
    let k = irrep_generator(j, Generator::K, order).matrix;
    let kinv = irrep_generator(j, Generator::KInv, order).matrix;
    let q2 = q_power(2.0, order);
    let qm2 = q_power(-2.0, order);
    let r1 = commutator(&e, &f).distance(&cartan_q_number(j.weights(), order));
    let r2 = (&(&k * &e) * &kinv).distance(&e.scale_series(&q2));
    let r3 = (&(&k * &f) * &kinv).distance(&f.scale_series(&qm2));
    let r4 = (&k * &kinv).distance(&SeriesMatrix::identity(j.dim(), order));
    r1.max(r2).max(r3).max(r4)
}

/// Max residual of the algebra relations for `Δ_ħ(E)`, `Δ_ħ(F)`, `Δ_ħ(K)`
/// on `V_{j1} ⊗ V_{j2}`: checks that the coproduct is an algebra map.
pub fn verify_coproduct_relations(j1: HalfInt, j2: HalfInt, order: usize) -> f64 {
    let rep = |g| coproduct_rep(j1, j2, g, true, order).expect("deformed generator").matrix;
    let (e, f, k, kinv) = (rep(Generator::E), rep(Generator::F), rep(Generator::K), rep(Generator::KInv));
    let weights = product_weights(&[j1, j2]).into_iter().map(|ms| ms[0] + ms[1]);
    let q2 = q_power(2.0, order);
    let qm2 = q_power(-2.0, order);
    let r1 = commutator(&e, &f).distance(&cartan_q_number(weights, order));
    let r2 = (&(&k * &e) * &kinv).distance(&e.scale_series(&q2));
    let r3 = (&(&k * &f) * &kinv).distance(&f.scale_series(&qm2));
    let r4 = (&k * &kinv).distance(&SeriesMatrix::identity(e.rows(), order));
    r1.max(r2).max(r3).max(r4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn trivial_rep_is_zero() {
        let e = irrep_generator(HalfInt::ZERO, Generator::E, 4);
        assert_eq!(e.matrix.rows(), 1);
        assert_eq!(e.matrix.max_abs(), 0.0);
    }

    #[test]
    fn spin_half_k_and_e() {
        let k = irrep_generator(spin(1), Generator::K, 6).matrix;
        assert!(k.get(0, 0).approx_eq(&q_power(-1.0, 6), 1e-15));
        assert!(k.get(1, 1).approx_eq(&q_power(1.0, 6), 1e-15));
        assert!(k.get(0, 1).is_zero() && k.get(1, 0).is_zero());

        let e = irrep_generator(spin(1), Generator::LowE, 6).matrix;
        assert_eq!(e.get(1, 0), HSeries::one(6));
        assert!(e.get(0, 0).is_zero() && e.get(0, 1).is_zero() && e.get(1, 1).is_zero());
    }

    #[test]
    fn deformed_relations_hold() {
        for t in 0..=5 {
            let r = verify_irrep_relations(spin(t), 6);
            assert!(r < 1e-10, "j = {}/2: {r:e}", t);
        }
        assert_eq!(verify_irrep_relations(HalfInt::ZERO, 6), 0.0);
    }

    #[test]
    fn coproduct_is_algebra_map() {
        for t1 in 0..=3 {
            for t2 in 0..=3 {
                let r = verify_coproduct_relations(spin(t1), spin(t2), 6);
                assert!(r < 1e-10, "({t1}/2, {t2}/2): {r:e}");
            }
        }
    }

    #[test]
    fn coproduct_of_products_is_product_of_coproducts() {
        // Δ(g1 g2) computed from the Sweedler terms of the word equals Δ(g1)Δ(g2)
        let (j1, j2, order) = (spin(2), spin(1), 6);
        for g1 in Generator::DEFORMED {
            for g2 in Generator::DEFORMED {
                let lhs = &coproduct_rep(j1, j2, g1, true, order).unwrap().matrix
                    * &coproduct_rep(j1, j2, g2, true, order).unwrap().matrix;
                let mut rhs = SeriesMatrix::zeros(lhs.rows(), lhs.cols(), order);
                for (a1, b1) in coproduct_terms(g1) {
                    for (a2, b2) in coproduct_terms(g2) {
                        let left = &factor_matrix(j1, a1, order) * &factor_matrix(j1, a2, order);
                        let right = &factor_matrix(j2, b1, order) * &factor_matrix(j2, b2, order);
                        rhs = rhs + left.kron(&right);
                    }
                }
                assert!(lhs.distance(&rhs) < 1e-12, "{g1}{g2}");
            }
        }
    }

    #[test]
    fn casimir_part_commutes_with_k() {
        for t in 0..=5 {
            let j = spin(t);
            let e = irrep_generator(j, Generator::E, 6).matrix;
            let f = irrep_generator(j, Generator::F, 6).matrix;
            let k = irrep_generator(j, Generator::K, 6).matrix;
            let c = &(&e * &f) + &(&f * &e);
            assert!(commutator(&c, &k).max_abs() < 1e-10);
        }
    }

    #[test]
    fn classical_limits_match() {
        for t in 0..=5 {
            let j = spin(t);
            for g in [Generator::E, Generator::F] {
                let d = irrep_generator(j, g, 6).matrix;
                let u = irrep_generator(j, g.partner(), 6).matrix;
                assert!((d.constant_term() - u.constant_term()).abs().max() < 1e-15);
            }
            let k = irrep_generator(j, Generator::K, 6).matrix;
            assert_eq!(k.constant_term(), SeriesMatrix::identity(j.dim(), 0).constant_term());
        }
    }

    #[test]
    fn coproduct_examples() {
        let (j1, j2) = (spin(1), spin(2));
        let k = coproduct_rep(j1, j2, Generator::K, true, 6).unwrap();
        for ms in product_weights(&[j1, j2]) {
            let i = k.index_of(&ms);
            assert!(k.matrix.get(i, i).approx_eq(&q_power(2.0 * (ms[0] + ms[1]).as_f64(), 6), 1e-14));
        }
        let half = spin(1);
        let e = coproduct_rep(half, half, Generator::LowE, false, 3).unwrap().matrix;
        let nonzero: Vec<_> =
            (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).filter(|&(r, c)| !e.get(r, c).is_zero()).collect();
        assert_eq!(nonzero, vec![(1, 0), (2, 0), (3, 1), (3, 2)]);
        assert!(nonzero.iter().all(|&(r, c)| e.get(r, c) == HSeries::one(3)));
        let ed = coproduct_rep(half, half, Generator::E, true, 3).unwrap().matrix;
        assert!((ed.constant_term() - e.constant_term()).abs().max() < 1e-15);
        assert!(matches!(coproduct_rep(half, half, Generator::E, false, 3), Err(Error::MixedFamily(..))));
        assert!(matches!(coproduct_rep(half, half, Generator::LowH, true, 3), Err(Error::MixedFamily(..))));
    }
}
