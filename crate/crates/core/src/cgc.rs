//! Classical and q-deformed Clebsch-Gordan coefficients.
//!
//! Both are evaluated with the Racah single-sum closed form. The q-version
//! uses symmetric q-factorials and the phase
//!
//! ```text
//! q^{((j1+j2−j)(j1+j2+j+1) + 2(j1 m2 − j2 m1))/2} · Σ_z (−1)^z q^{−z(j1+j2+j+1)} / (…)
//! ```
//!
//! which makes the coupling matrix orthogonal and intertwines the symmetric
//! coproduct of [`crate::reps`]. Stretched coefficients are positive
//! (Condon-Shortley).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hseries::{q_factorial, q_integer, q_power, HSeries, HalfInt};
use crate::matrix::SeriesMatrix;
use crate::reps::product_weights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CGQuery {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub j: HalfInt,
    pub m1: HalfInt,
    pub m2: HalfInt,
    pub m: HalfInt,
}

impl CGQuery {
    pub fn new(j1: HalfInt, j2: HalfInt, j: HalfInt, m1: HalfInt, m2: HalfInt, m: HalfInt) -> Self {
        CGQuery { j1, j2, j, m1, m2, m }
    }

    /// Shorthand taking all six labels as twice their value.
    pub fn from_twice(t: [i32; 6]) -> Self {
        let h = HalfInt::from_twice;
        CGQuery::new(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5]))
    }

    /// Stretched coupling `j = j1 + j2`, `m = m1 + m2`.
    pub fn stretched(j1: HalfInt, j2: HalfInt, m1: HalfInt, m2: HalfInt) -> Self {
        CGQuery::new(j1, j2, j1 + j2, m1, m2, m1 + m2)
    }

    fn validate(&self) -> Result<()> {
        for (j, m, name) in [(self.j1, self.m1, "1"), (self.j2, self.m2, "2"), (self.j, self.m, "")] {
            if j.twice() < 0 {
                return Err(Error::InvalidQuery(format!("negative spin j{name} = {j}")));
            }
            if (j.twice() - m.twice()) % 2 != 0 {
                return Err(Error::InvalidQuery(format!("j{name} − m{name} = {j} − {m} is not an integer")));
            }
        }
        Ok(())
    }

    /// Whether the selection rules allow a nonzero coefficient.
    pub fn is_allowed(&self) -> bool {
        let CGQuery { j1, j2, j, m1, m2, m } = *self;
        j1.admits(m1)
            && j2.admits(m2)
            && j.admits(m)
            && m1 + m2 == m
            && (j1 - j2).abs() <= j
            && j <= j1 + j2
            && (j1 + j2 - j).is_integer()
    }
}

/// Integer arguments of the Racah sum; all are nonnegative for allowed queries.
struct RacahArgs {
    tri: [i32; 3],
    big: i32,
    facts: [i32; 6],
    z_min: i32,
    z_max: i32,
}

impl RacahArgs {
    fn new(q: &CGQuery) -> Self {
        let int = |h: HalfInt| h.to_int().expect("integral combination");
        let CGQuery { j1, j2, j, m1, m2, m } = *q;
        let tri = [int(j1 + j2 - j), int(j1 - j2 + j), int(j2 - j1 + j)];
        let big = int(j1 + j2 + j) + 1;
        let facts = [int(j1 + m1), int(j1 - m1), int(j2 + m2), int(j2 - m2), int(j + m), int(j - m)];
        let z_min = 0.max(int(j2 - j - m1)).max(int(j1 - j + m2));
        let z_max = int(j1 + j2 - j).min(int(j1 - m1)).min(int(j2 + m2));
        RacahArgs { tri, big, facts, z_min, z_max }
    }

    /// The six factorial arguments of the z-th summand denominator.
    fn denominators(&self, q: &CGQuery, z: i32) -> [i32; 6] {
        let int = |h: HalfInt| h.to_int().expect("integral combination");
        let CGQuery { j1, j2, j, m1, m2, .. } = *q;
        [z, int(j1 + j2 - j) - z, int(j1 - m1) - z, int(j2 + m2) - z, int(j - j2 + m1) + z, int(j - j1 - m2) + z]
    }
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Classical Clebsch-Gordan coefficient ⟨j1 m1 j2 m2 | j m⟩ (Condon-Shortley).
pub fn cg(q: CGQuery) -> Result<f64> {
    q.validate()?;
    if !q.is_allowed() {
        return Ok(0.0);
    }
    if q.j1 == HalfInt::ZERO || q.j2 == HalfInt::ZERO {
        return Ok(1.0);
    }
    let a = RacahArgs::new(&q);
    let two_j_plus_one = f64::from(q.j.twice() + 1);
    let tri: f64 = a.tri.iter().map(|&n| factorial(n)).product();
    let pre = (two_j_plus_one * tri / factorial(a.big)).sqrt()
        * a.facts.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    let mut sum = 0.0;
    for z in a.z_min..=a.z_max {
        let den: f64 = a.denominators(&q, z).iter().map(|&n| factorial(n)).product();
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    Ok(pre * sum)
}

type CacheKey = ([i32; 6], usize);

fn qcg_cache() -> &'static RwLock<HashMap<CacheKey, HSeries>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, HSeries>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// q-deformed Clebsch-Gordan coefficient as a truncated series in ħ.
pub fn qcg(q: CGQuery, order: usize) -> Result<HSeries> {
    q.validate()?;
    if !q.is_allowed() {
        return Ok(HSeries::zero(order));
    }
    // trivial leg: exactly 1, without round-off from the alternating sum
    if q.j1 == HalfInt::ZERO || q.j2 == HalfInt::ZERO {
        return Ok(HSeries::one(order));
    }
    let key = ([q.j1.twice(), q.j2.twice(), q.j.twice(), q.m1.twice(), q.m2.twice(), q.m.twice()], order);
    if let Some(hit) = qcg_cache().read().expect("qcg cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let value = qcg_uncached(&q, order);
    qcg_cache().write().expect("qcg cache poisoned").insert(key, value.clone());
    Ok(value)
}

fn qcg_uncached(q: &CGQuery, order: usize) -> HSeries {
    let a = RacahArgs::new(q);
    let qf = |n: i32| q_factorial(n as u32, order);
    let num = a.tri.iter().chain(&a.facts).fold(q_integer(q.j.twice() as i64 + 1, order), |acc, &n| acc * qf(n));
    let radicand = num.div(&qf(a.big)).expect("q-factorials are units");
    let root = radicand.sqrt().expect("radicand has positive classical limit");

    let (j1, j2, m1, m2) = (q.j1.as_f64(), q.j2.as_f64(), q.m1.as_f64(), q.m2.as_f64());
    let phase = (f64::from(a.tri[0]) * f64::from(a.big) + 2.0 * (j1 * m2 - j2 * m1)) / 2.0;

    let mut sum = HSeries::zero(order);
    for z in a.z_min..=a.z_max {
        let den = a.denominators(q, z).iter().fold(HSeries::one(order), |acc, &n| acc * qf(n));
        let term = q_power(-f64::from(z * a.big), order) * den.invert().expect("q-factorials are units");
        if z % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
    }
    q_power(phase, order) * root * sum
}

/// Orthogonal change of basis from `V_{j1} ⊗ V_{j2}` (rows, `(m1, m2)`
/// row-major) to the coupled basis (columns, `(j, m)` with `j` ascending from
/// `|j1 − j2|` and `m` ascending).
#[derive(Clone, Debug, Serialize)]
pub struct CouplingMatrix {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub columns: Vec<(HalfInt, HalfInt)>,
    pub matrix: SeriesMatrix,
}

impl CouplingMatrix {
    /// Coupled spins in column-block order.
    pub fn coupled_spins(&self) -> Vec<HalfInt> {
        coupled_spins(self.j1, self.j2)
    }
}

/// `|j1 − j2|, …, j1 + j2`.
pub fn coupled_spins(j1: HalfInt, j2: HalfInt) -> Vec<HalfInt> {
    let lo = (j1 - j2).abs().twice();
    let hi = (j1 + j2).twice();
    (lo..=hi).step_by(2).map(HalfInt::from_twice).collect()
}

pub fn cg_matrix(j1: HalfInt, j2: HalfInt, deformed: bool, order: usize) -> CouplingMatrix {
    let columns: Vec<(HalfInt, HalfInt)> =
        coupled_spins(j1, j2).into_iter().flat_map(|j| j.weights().map(move |m| (j, m))).collect();
    let rows = product_weights(&[j1, j2]);
    let n = rows.len();
    let mut matrix = SeriesMatrix::zeros(n, n, order);
    for (c, &(j, m)) in columns.iter().enumerate() {
        for (r, ms) in rows.iter().enumerate() {
            if ms[0] + ms[1] != m {
                continue;
            }
            let query = CGQuery::new(j1, j2, j, ms[0], ms[1], m);
            let value = if deformed {
                qcg(query, order).expect("well-formed query")
            } else {
                HSeries::constant(cg(query).expect("well-formed query"), order)
            };
            matrix.set(r, c, &value);
        }
    }
    CouplingMatrix { j1, j2, columns, matrix }
}

/// `⊕_j block(j)` laid out in the column order of [`cg_matrix`].
pub fn coupled_block_diag(j1: HalfInt, j2: HalfInt, mut block: impl FnMut(HalfInt) -> SeriesMatrix) -> SeriesMatrix {
    let blocks: Vec<SeriesMatrix> = coupled_spins(j1, j2).into_iter().map(&mut block).collect();
    SeriesMatrix::block_diag(&blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{coproduct_rep, irrep_generator, Generator};

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    /// Stretched coefficient from binomials only.
    fn stretched_closed_form(j1: HalfInt, j2: HalfInt, m1: HalfInt, m2: HalfInt) -> f64 {
        let binom = |n: i32, k: i32| factorial(n) / (factorial(k) * factorial(n - k));
        let b1 = binom(j1.twice(), (j1 + m1).to_int().unwrap());
        let b2 = binom(j2.twice(), (j2 + m2).to_int().unwrap());
        let b = binom((j1 + j2).twice(), (j1 + j2 + m1 + m2).to_int().unwrap());
        (b1 * b2 / b).sqrt()
    }

    #[test]
    fn classical_examples() {
        assert!((cg(CGQuery::from_twice([1, 1, 2, 1, 1, 2])).unwrap() - 1.0).abs() < 1e-15);
        let singlet = cg(CGQuery::from_twice([1, 1, 0, 1, -1, 0])).unwrap();
        assert!((singlet - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cg(CGQuery::from_twice([2, 2, 2, 2, 2, 4])).unwrap(), 0.0);
        assert!(matches!(cg(CGQuery::from_twice([1, 1, 2, 2, 1, 3])), Err(Error::InvalidQuery(_))));
        assert!(matches!(cg(CGQuery::from_twice([-1, 1, 0, 1, -1, 0])), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn classical_spot_values() {
        // ⟨1 0 1/2 1/2 | 3/2 1/2⟩ = √(2/3), ⟨1 1 1/2 −1/2 | 1/2 1/2⟩ = √(2/3),
        // ⟨1 0 1/2 1/2 | 1/2 1/2⟩ = −√(1/3)
        let c1 = cg(CGQuery::from_twice([2, 1, 3, 0, 1, 1])).unwrap();
        let c2 = cg(CGQuery::from_twice([2, 1, 1, 2, -1, 1])).unwrap();
        let c3 = cg(CGQuery::from_twice([2, 1, 1, 0, 1, 1])).unwrap();
        assert!((c1 - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((c2 - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((c3 + (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn stretched_identity() {
        for t1 in 0..=4 {
            for t2 in 0..=4 {
                let (j1, j2) = (h(t1), h(t2));
                for m1 in j1.weights() {
                    for m2 in j2.weights() {
                        let racah = cg(CGQuery::stretched(j1, j2, m1, m2)).unwrap();
                        assert!((racah - stretched_closed_form(j1, j2, m1, m2)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn qcg_examples() {
        assert!(qcg(CGQuery::from_twice([1, 1, 2, 1, 1, 2]), 6).unwrap().approx_eq(&HSeries::one(6), 1e-14));
        let s = qcg(CGQuery::from_twice([1, 1, 0, 1, -1, 0]), 6).unwrap();
        assert!((s.constant_term() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(qcg(CGQuery::from_twice([2, 2, 2, 2, 2, 4]), 6).unwrap().is_zero());
    }

    #[test]
    fn qcg_classical_limit() {
        for t1 in 0..=4 {
            for t2 in 0..=4 {
                let (j1, j2) = (h(t1), h(t2));
                for j in coupled_spins(j1, j2) {
                    for m1 in j1.weights() {
                        for m2 in j2.weights() {
                            let query = CGQuery::new(j1, j2, j, m1, m2, m1 + m2);
                            let d = qcg(query, 6).unwrap().constant_term() - cg(query).unwrap();
                            assert!(d.abs() < 1e-10, "{query:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coupling_matrices_are_orthogonal() {
        for t1 in 0..=3 {
            for t2 in 0..=3 {
                for deformed in [false, true] {
                    let c = cg_matrix(h(t1), h(t2), deformed, 6).matrix;
                    let id = SeriesMatrix::identity(c.rows(), 6);
                    assert!((&c.transpose() * &c).distance(&id) < 1e-9);
                    assert!((&c * &c.transpose()).distance(&id) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn trivial_factor_gives_identity() {
        for t in 0..=3 {
            for (a, b) in [(HalfInt::ZERO, h(t)), (h(t), HalfInt::ZERO)] {
                let c = cg_matrix(a, b, true, 4).matrix;
                assert!(c.distance(&SeriesMatrix::identity(c.rows(), 4)) < 1e-14);
            }
        }
    }

    #[test]
    fn singlet_column_is_condon_shortley() {
        let c = cg_matrix(h(1), h(1), false, 0);
        assert_eq!(c.columns[0], (HalfInt::ZERO, HalfInt::ZERO));
        let col: Vec<f64> = (0..4).map(|r| c.matrix.get(r, 0).constant_term()).collect();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // rows (−½,−½), (−½,½), (½,−½), (½,½)
        let expect = [0.0, -s, s, 0.0];
        for (a, b) in col.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_intertwines_coproducts() {
        for t1 in 0..=3 {
            for t2 in 0..=3 {
                let (j1, j2) = (h(t1), h(t2));
                for deformed in [true, false] {
                    let c = cg_matrix(j1, j2, deformed, 6).matrix;
                    let gens: &[Generator] = if deformed { &Generator::DEFORMED } else { &Generator::UNDEFORMED };
                    for &g in gens {
                        let delta = coproduct_rep(j1, j2, g, deformed, 6).unwrap().matrix;
                        let conj = &(&c.transpose() * &delta) * &c;
                        let blocks = coupled_block_diag(j1, j2, |j| irrep_generator(j, g, 6).matrix);
                        let r = conj.distance(&blocks);
                        assert!(r < 1e-9, "({j1}, {j2}) {g}: {r:e}");
                    }
                }
            }
        }
    }
}
