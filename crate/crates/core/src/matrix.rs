//! Dense matrices over [`HSeries`], stored as one real matrix per power of ħ.
//!
//! `M = Σ_k ħᵏ M_k`; products are Cauchy products of the coefficient
//! matrices, truncated to the smaller order.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hseries::HSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    coeffs: Vec<DMatrix<f64>>,
}

impl SeriesMatrix {
    pub fn zeros(rows: usize, cols: usize, order: usize) -> Self {
        SeriesMatrix { coeffs: vec![DMatrix::zeros(rows, cols); order + 1] }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        Self::from_constant(DMatrix::identity(n, n), order)
    }

    /// Embeds a real matrix as the ħ⁰ term.
    pub fn from_constant(m: DMatrix<f64>, order: usize) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols(), order);
        out.coeffs[0] = m;
        out
    }

    pub fn from_coeff_matrices(coeffs: Vec<DMatrix<f64>>) -> Self {
        assert!(!coeffs.is_empty());
        SeriesMatrix { coeffs }
    }

    pub fn from_fn(rows: usize, cols: usize, order: usize, mut f: impl FnMut(usize, usize) -> Option<HSeries>) -> Self {
        let mut out = Self::zeros(rows, cols, order);
        for r in 0..rows {
            for c in 0..cols {
                if let Some(s) = f(r, c) {
                    out.set(r, c, &s);
                }
            }
        }
        out
    }

    pub fn diagonal(entries: &[HSeries], order: usize) -> Self {
        let n = entries.len();
        let mut out = Self::zeros(n, n, order);
        for (i, s) in entries.iter().enumerate() {
            out.set(i, i, s);
        }
        out
    }

    /// Block-diagonal sum in the given order.
    pub fn block_diag(blocks: &[SeriesMatrix]) -> Self {
        let order = blocks.iter().map(|b| b.order()).min().unwrap_or(0);
        let rows = blocks.iter().map(|b| b.rows()).sum();
        let cols = blocks.iter().map(|b| b.cols()).sum();
        let mut out = Self::zeros(rows, cols, order);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for k in 0..=order {
                out.coeffs[k].view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.coeffs[k]);
            }
            r0 += b.rows();
            c0 += b.cols();
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.coeffs[0].ncols()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Real matrix multiplying ħᵏ.
    pub fn coeff(&self, k: usize) -> &DMatrix<f64> {
        &self.coeffs[k]
    }

    pub fn constant_term(&self) -> &DMatrix<f64> {
        &self.coeffs[0]
    }

    pub fn get(&self, r: usize, c: usize) -> HSeries {
        HSeries::from_coeffs(self.coeffs.iter().map(|m| m[(r, c)]).collect())
    }

    pub fn set(&mut self, r: usize, c: usize, s: &HSeries) {
        for (k, m) in self.coeffs.iter_mut().enumerate() {
            m[(r, c)] = s.coeff(k);
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let (r, c) = (self.rows(), self.cols());
        let coeffs = (0..=order).map(|k| self.coeffs.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(r, c))).collect();
        SeriesMatrix { coeffs }
    }

    pub fn transpose(&self) -> Self {
        SeriesMatrix { coeffs: self.coeffs.iter().map(|m| m.transpose()).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        SeriesMatrix { coeffs: self.coeffs.iter().map(|m| m * c).collect() }
    }

    /// Multiplies every entry by the series `s`.
    pub fn scale_series(&self, s: &HSeries) -> Self {
        let order = self.order().min(s.order());
        let coeffs = (0..=order)
            .map(|k| {
                let mut acc = DMatrix::zeros(self.rows(), self.cols());
                for i in 0..=k {
                    let c = s.coeff(k - i);
                    if c != 0.0 {
                        acc += &self.coeffs[i] * c;
                    }
                }
                acc
            })
            .collect();
        SeriesMatrix { coeffs }
    }

    /// Kronecker product with `self` as the outer (slow) index.
    pub fn kron(&self, other: &SeriesMatrix) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| {
                let mut acc = DMatrix::zeros(self.rows() * other.rows(), self.cols() * other.cols());
                for i in 0..=k {
                    acc += self.coeffs[i].kronecker(&other.coeffs[k - i]);
                }
                acc
            })
            .collect();
        SeriesMatrix { coeffs }
    }

    /// Inverse as a power series: needs an invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows() != self.cols() {
            return Err(Error::SingularMatrix);
        }
        let inv0 = self.coeffs[0].clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let mut out = vec![inv0.clone()];
        for k in 1..=self.order() {
            let mut acc = DMatrix::zeros(self.rows(), self.cols());
            for i in 1..=k {
                acc += &self.coeffs[i] * &out[k - i];
            }
            out.push(-(&inv0 * acc));
        }
        Ok(SeriesMatrix { coeffs: out })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flat_map(|m| m.iter()).fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Max-norm over all entries and all coefficients of the common order.
    pub fn distance(&self, other: &SeriesMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()), "shape mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Embeds an operator acting on some legs of a tensor product.
    ///
    /// `dims` are the leg dimensions of the full space (row-major, leg 0
    /// slowest); `legs` names the legs `self` acts on, in the order of its
    /// own row-major factor index. The other legs carry the identity.
    pub fn embed_legs(&self, dims: &[usize], legs: &[usize]) -> Self {
        let sub_dims: Vec<usize> = legs.iter().map(|&l| dims[l]).collect();
        assert_eq!(sub_dims.iter().product::<usize>(), self.rows(), "operator dimension does not match legs");
        let rest: Vec<usize> = (0..dims.len()).filter(|l| !legs.contains(l)).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&l| dims[l]).collect();
        let total: usize = dims.iter().product();
        let strides = strides(dims);

        // full index from (sub index, rest index)
        let compose = |sub: usize, other: usize| -> usize {
            let mut idx = 0;
            for (pos, digit) in digits(sub, &sub_dims).into_iter().enumerate() {
                idx += digit * strides[legs[pos]];
            }
            for (pos, digit) in digits(other, &rest_dims).into_iter().enumerate() {
                idx += digit * strides[rest[pos]];
            }
            idx
        };
        let n_sub = self.rows();
        let n_rest: usize = rest_dims.iter().product();
        let table: Vec<Vec<usize>> = (0..n_rest).map(|o| (0..n_sub).map(|s| compose(s, o)).collect()).collect();

        let mut out = Self::zeros(total, total, self.order());
        for (k, m) in self.coeffs.iter().enumerate() {
            for row in &table {
                for r in 0..n_sub {
                    for c in 0..n_sub {
                        let v = m[(r, c)];
                        if v != 0.0 {
                            out.coeffs[k][(row[r], row[c])] = v;
                        }
                    }
                }
            }
        }
        out
    }

    /// Permutation matrix mapping the tensor leg order `perm` back to
    /// natural order: `P · (v_{perm(0)} ⊗ v_{perm(1)} ⊗ …) = v_0 ⊗ v_1 ⊗ …`.
    pub fn leg_permutation(dims: &[usize], perm: &[usize], order: usize) -> Self {
        let total: usize = dims.iter().product();
        let permuted_dims: Vec<usize> = perm.iter().map(|&l| dims[l]).collect();
        let strides = strides(dims);
        let mut m = DMatrix::zeros(total, total);
        for src in 0..total {
            let ds = digits(src, &permuted_dims);
            let dst: usize = ds.iter().enumerate().map(|(pos, d)| d * strides[perm[pos]]).sum();
            m[(dst, src)] = 1.0;
        }
        Self::from_constant(m, order)
    }

    /// Real matrix of the ħᵏ coefficients, as a nested row-major vector of series.
    pub fn to_series_rows(&self) -> Vec<Vec<HSeries>> {
        (0..self.rows()).map(|r| (0..self.cols()).map(|c| self.get(r, c)).collect()).collect()
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

fn cauchy(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    assert_eq!(a.cols(), b.rows(), "shape mismatch in product");
    let order = a.order().min(b.order());
    let coeffs = (0..=order)
        .map(|k| {
            let mut acc = DMatrix::zeros(a.rows(), b.cols());
            for i in 0..=k {
                acc.gemm(1.0, &a.coeffs[i], &b.coeffs[k - i], 1.0);
            }
            acc
        })
        .collect();
    SeriesMatrix { coeffs }
}

fn zip(a: &SeriesMatrix, b: &SeriesMatrix, sign: f64) -> SeriesMatrix {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()), "shape mismatch");
    SeriesMatrix { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y * sign).collect() }
}

impl Mul for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn mul(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        cauchy(self, rhs)
    }
}

impl Mul for SeriesMatrix {
    type Output = SeriesMatrix;
    fn mul(self, rhs: SeriesMatrix) -> SeriesMatrix {
        cauchy(&self, &rhs)
    }
}

impl Add for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn add(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        zip(self, rhs, 1.0)
    }
}

impl Add for SeriesMatrix {
    type Output = SeriesMatrix;
    fn add(self, rhs: SeriesMatrix) -> SeriesMatrix {
        zip(&self, &rhs, 1.0)
    }
}

impl Sub for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn sub(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        zip(self, rhs, -1.0)
    }
}

impl Sub for SeriesMatrix {
    type Output = SeriesMatrix;
    fn sub(self, rhs: SeriesMatrix) -> SeriesMatrix {
        zip(&self, &rhs, -1.0)
    }
}

/// Serialized as a row-major array of arrays of series.
impl Serialize for SeriesMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_series_rows().serialize(serializer)
    }
}
