//! Representations of Drinfeld twists, their inverses, and the coassociator.
//!
//! On `V_{j1} ⊗ V_{j2}` the twist is
//!
//! ```text
//! F^{m1 m2}_{m1' m2'} = Σ_{j,m} η(j1, j2, j) · qcg(j1 j2 j; m1 m2 m) · cg(j1 j2 j; m1' m2' m)
//! ```
//!
//! i.e. `F = C_q · diag(η) · Cᵀ` with the two coupling matrices of
//! [`crate::cgc`]. Orthogonality of both gives the inverse in closed form,
//! `F⁻¹ = C · diag(η⁻¹) · C_qᵀ`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cgc::{cg, cg_matrix, coupled_block_diag, coupled_spins, CGQuery};
use crate::error::{Error, Result};
use crate::hseries::{q_power, HSeries, HalfInt};
use crate::matrix::SeriesMatrix;
use crate::reps::{coproduct_rep, irrep_generator, product_weights, Generator, TensorOp};

type EtaFn = dyn Fn(HalfInt, HalfInt, HalfInt, usize) -> Option<HSeries> + Send + Sync;

#[derive(Clone)]
enum EtaKind {
    One,
    Table { entries: BTreeMap<(HalfInt, HalfInt, HalfInt), HSeries>, fallback_one: bool },
    Func(Arc<EtaFn>),
}

/// The scalar series `η(j1, j2, j)` that parametrizes a twist.
#[derive(Clone)]
pub struct EtaFunction {
    kind: EtaKind,
}

impl Default for EtaFunction {
    fn default() -> Self {
        Self::one()
    }
}

impl fmt::Debug for EtaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EtaKind::One => write!(f, "EtaFunction::One"),
            EtaKind::Table { entries, fallback_one } => f
                .debug_struct("EtaFunction::Table")
                .field("entries", entries)
                .field("fallback_one", fallback_one)
                .finish(),
            EtaKind::Func(_) => write!(f, "EtaFunction::Func(..)"),
        }
    }
}

impl EtaFunction {
    /// `η ≡ 1`.
    pub fn one() -> Self {
        EtaFunction { kind: EtaKind::One }
    }

    /// Only the listed triples are defined.
    pub fn table(entries: BTreeMap<(HalfInt, HalfInt, HalfInt), HSeries>) -> Self {
        EtaFunction { kind: EtaKind::Table { entries, fallback_one: false } }
    }

    /// `η ≡ 1` except on the listed triples.
    pub fn one_with_overrides(entries: BTreeMap<(HalfInt, HalfInt, HalfInt), HSeries>) -> Self {
        EtaFunction { kind: EtaKind::Table { entries, fallback_one: true } }
    }

    /// Arbitrary rule; `None` means undefined. The last argument is the
    /// truncation order requested.
    pub fn from_fn(f: impl Fn(HalfInt, HalfInt, HalfInt, usize) -> Option<HSeries> + Send + Sync + 'static) -> Self {
        EtaFunction { kind: EtaKind::Func(Arc::new(f)) }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind, EtaKind::One)
    }

    pub fn eval(&self, j1: HalfInt, j2: HalfInt, j: HalfInt, order: usize) -> Result<HSeries> {
        let value = match &self.kind {
            EtaKind::One => Some(HSeries::one(order)),
            EtaKind::Table { entries, fallback_one } => entries
                .get(&(j1, j2, j))
                .map(|s| s.truncate(order))
                .or_else(|| fallback_one.then(|| HSeries::one(order))),
            EtaKind::Func(f) => f(j1, j2, j, order).map(|s| s.truncate(order)),
        };
        let value = value.ok_or(Error::EtaUndefined(j1, j2, j))?;
        if value.constant_term().abs() < 1e-12 {
            return Err(Error::NonInvertibleEta(j1, j2, j));
        }
        Ok(value)
    }
}

/// `(ρ^{j1} ⊗ ρ^{j2})(F)` together with its inverse.
#[derive(Clone, Debug, Serialize)]
pub struct TwistRep {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub forward: TensorOp,
    pub inverse: TensorOp,
    #[serde(skip)]
    pub eta: EtaFunction,
}

impl TwistRep {
    pub fn order(&self) -> usize {
        self.forward.matrix.order()
    }

    /// Max of `‖F·F⁻¹ − 1‖`, `‖F⁻¹·F − 1‖` and the distance between the
    /// closed-form inverse and the series matrix inverse.
    pub fn inverse_residual(&self) -> Result<f64> {
        let f = &self.forward.matrix;
        let g = &self.inverse.matrix;
        let id = SeriesMatrix::identity(f.rows(), self.order());
        let direct = f.inverse()?;
        Ok((f * g).distance(&id).max((g * f).distance(&id)).max(direct.distance(g)))
    }
}

pub fn twist_rep(j1: HalfInt, j2: HalfInt, eta: &EtaFunction, order: usize) -> Result<TwistRep> {
    let cq = cg_matrix(j1, j2, true, order).matrix;
    let c = cg_matrix(j1, j2, false, order).matrix;
    let mut etas = Vec::new();
    for j in coupled_spins(j1, j2) {
        let value = eta.eval(j1, j2, j, order)?;
        let inv = value.invert().map_err(|_| Error::NonInvertibleEta(j1, j2, j))?;
        etas.push((j, value, inv));
    }
    let scalar_blocks = |pick: &dyn Fn(&(HalfInt, HSeries, HSeries)) -> &HSeries| {
        let mut it = etas.iter();
        coupled_block_diag(j1, j2, |j| {
            let entry = it.next().expect("one eta per coupled spin");
            SeriesMatrix::identity(j.dim(), order).scale_series(pick(entry))
        })
    };
    let diag = scalar_blocks(&|e| &e.1);
    let diag_inv = scalar_blocks(&|e| &e.2);
    let forward = &(&cq * &diag) * &c.transpose();
    let inverse = &(&c * &diag_inv) * &cq.transpose();
    Ok(TwistRep {
        j1,
        j2,
        forward: TensorOp::new(vec![j1, j2], forward),
        inverse: TensorOp::new(vec![j1, j2], inverse),
        eta: eta.clone(),
    })
}

/// Matrix of `Δ(g)` for the element of `U(su2)[[ħ]]` that acts on every
/// spin-`j` irrep as the deformed generator `g` does.
///
/// `K^{±1}` is `exp(±ħh)`, so its coproduct is the diagonal
/// `exp(±ħ(h ⊗ 1 + 1 ⊗ h))`. For `E` and `F` the image is obtained by
/// coupling with classical Clebsch-Gordan coefficients, acting blockwise and
/// uncoupling.
pub fn undeformed_partner_coproduct(j1: HalfInt, j2: HalfInt, g: Generator, order: usize) -> Result<SeriesMatrix> {
    match g {
        Generator::K | Generator::KInv => {
            let sign = if g == Generator::K { 1.0 } else { -1.0 };
            let diag: Vec<HSeries> = product_weights(&[j1, j2])
                .into_iter()
                .map(|ms| q_power(sign * 2.0 * (ms[0] + ms[1]).as_f64(), order))
                .collect();
            Ok(SeriesMatrix::diagonal(&diag, order))
        }
        Generator::E | Generator::F => {
            let c = cg_matrix(j1, j2, false, order).matrix;
            let blocks = coupled_block_diag(j1, j2, |j| irrep_generator(j, g, order).matrix);
            Ok(&(&c * &blocks) * &c.transpose())
        }
        other => Err(Error::MixedFamily(other.to_string(), true)),
    }
}

/// Max-norm of `Δ_ħ(g)·F − F·Δ(g)`.
pub fn verify_intertwiner(tw: &TwistRep, g: Generator) -> Result<f64> {
    let order = tw.order();
    let deformed = coproduct_rep(tw.j1, tw.j2, g, true, order)?.matrix;
    let undeformed = undeformed_partner_coproduct(tw.j1, tw.j2, g, order)?;
    let f = &tw.forward.matrix;
    Ok((&deformed * f).distance(&(f * &undeformed)))
}

/// `(Δ ⊗ id)(X)` on `V_{j1} ⊗ V_{j2} ⊗ V_{j3}` for a two-leg family `X(j, j3)`.
fn coproduct_first_leg(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    order: usize,
    mut x: impl FnMut(HalfInt) -> Result<SeriesMatrix>,
) -> Result<SeriesMatrix> {
    let c = cg_matrix(j1, j2, false, order).matrix.kron(&SeriesMatrix::identity(j3.dim(), order));
    let blocks = coupled_spins(j1, j2).into_iter().map(&mut x).collect::<Result<Vec<_>>>()?;
    Ok(&(&c * &SeriesMatrix::block_diag(&blocks)) * &c.transpose())
}

/// `(id ⊗ Δ)(X)` on `V_{j1} ⊗ V_{j2} ⊗ V_{j3}` for a two-leg family `X(j1, j)`.
fn coproduct_second_leg(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    order: usize,
    mut x: impl FnMut(HalfInt) -> Result<SeriesMatrix>,
) -> Result<SeriesMatrix> {
    let c = SeriesMatrix::identity(j1.dim(), order).kron(&cg_matrix(j2, j3, false, order).matrix);
    let spins = coupled_spins(j2, j3);
    let blocks = spins.iter().map(|&j| x(j)).collect::<Result<Vec<_>>>()?;
    // (m1, (j, m)) ordering → block ordering (j, (m1, m))
    let n = j1.dim() * j2.dim() * j3.dim();
    let coupled_dim: usize = spins.iter().map(|j| j.dim()).sum();
    let mut perm = DMatrix::zeros(n, n);
    let mut block_offset = 0;
    let mut coupled_offset = 0;
    for j in &spins {
        for a in 0..j1.dim() {
            for b in 0..j.dim() {
                let natural = a * coupled_dim + coupled_offset + b;
                let blocked = block_offset + a * j.dim() + b;
                perm[(blocked, natural)] = 1.0;
            }
        }
        block_offset += j1.dim() * j.dim();
        coupled_offset += j.dim();
    }
    let p = SeriesMatrix::from_constant(perm, order);
    let inner = &(&p.transpose() * &SeriesMatrix::block_diag(&blocks)) * &p;
    Ok(&(&c * &inner) * &c.transpose())
}

/// `Φ = (Δ⊗id)(F⁻¹) · (F⁻¹⊗1) · (1⊗F) · (id⊗Δ)(F)` on `V_{j1} ⊗ V_{j2} ⊗ V_{j3}`.
pub fn coassociator_rep(j1: HalfInt, j2: HalfInt, j3: HalfInt, eta: &EtaFunction, order: usize) -> Result<TensorOp> {
    let delta_id_finv = coproduct_first_leg(j1, j2, j3, order, |j| Ok(twist_rep(j, j3, eta, order)?.inverse.matrix))?;
    let f12 = twist_rep(j1, j2, eta, order)?;
    let f23 = twist_rep(j2, j3, eta, order)?;
    let finv_1 = f12.inverse.matrix.kron(&SeriesMatrix::identity(j3.dim(), order));
    let f_23 = SeriesMatrix::identity(j1.dim(), order).kron(&f23.forward.matrix);
    let id_delta_f = coproduct_second_leg(j1, j2, j3, order, |j| Ok(twist_rep(j1, j, eta, order)?.forward.matrix))?;
    let phi = &(&(&delta_id_finv * &finv_1) * &f_23) * &id_delta_f;
    Ok(TensorOp::new(vec![j1, j2, j3], phi))
}

/// Classical triple product `V_{j1} ⊗ V_{j2} ⊗ V_{j3} → V_{j1+j2+j3}` on the
/// T-basis of the plane: rows are the weights of the total spin.
pub fn triple_product_map(j1: HalfInt, j2: HalfInt, j3: HalfInt, order: usize) -> SeriesMatrix {
    let j12 = j1 + j2;
    let total = j12 + j3;
    let cols = product_weights(&[j1, j2, j3]);
    SeriesMatrix::from_fn(total.dim(), cols.len(), order, |r, c| {
        let ms = &cols[c];
        let m = ms[0] + ms[1] + ms[2];
        if total.weight_index(m) != r {
            return None;
        }
        let a = cg(CGQuery::stretched(j1, j2, ms[0], ms[1])).ok()?;
        let b = cg(CGQuery::stretched(j12, j3, ms[0] + ms[1], ms[2])).ok()?;
        Some(HSeries::constant(a * b, order))
    })
}

/// Max-norm of `μ₃ ∘ Φ − μ₃`: zero iff `(Φ₁▷x)(Φ₂▷y)(Φ₃▷z) = xyz` on the
/// given homogeneous components.
pub fn verify_coassociator_on_products(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    eta: &EtaFunction,
    order: usize,
) -> Result<f64> {
    let phi = coassociator_rep(j1, j2, j3, eta, order)?;
    let mu = triple_product_map(j1, j2, j3, order);
    Ok((&mu * &phi.matrix).distance(&mu))
}
