//! Truncated power series in the deformation parameter ħ, with q = e^ħ.
//!
//! [`HSeries`] is the scalar type of the whole crate. A series of order `K`
//! stores the `K + 1` coefficients of ħ⁰ … ħᴷ; every binary operation
//! truncates to the smaller of the two operand orders.
//!
//! The q-number helpers come in two conventions: symmetric q-integers
//! `[n] = (qⁿ − q⁻ⁿ)/(q − q⁻¹)` (used by the representation theory) and
//! Gauss binomials at an arbitrary base `Q = q^s` (used by the plane basis).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation order used when none is requested.
pub const DEFAULT_ORDER: usize = 6;

const UNIT_TOL: f64 = 1e-12;

/// A half-integer stored exactly as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// The integer value, if this is one.
    pub fn to_int(self) -> Option<i32> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    /// Dimension `2j + 1` of the spin-`j` representation.
    pub fn dim(self) -> usize {
        debug_assert!(self.twice >= 0);
        (self.twice + 1) as usize
    }

    /// Magnetic labels `−j, −j+1, …, j` in ascending order.
    pub fn weights(self) -> impl Iterator<Item = HalfInt> + Clone {
        let t = self.twice;
        (0..=t).map(move |i| HalfInt::from_twice(2 * i - t))
    }

    /// Position of weight `m` inside [`HalfInt::weights`].
    pub fn weight_index(self, m: HalfInt) -> usize {
        ((m.twice + self.twice) / 2) as usize
    }

    /// Whether `m` is a valid magnetic label for spin `self`.
    pub fn admits(self, m: HalfInt) -> bool {
        self.twice >= 0 && m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    /// All spins `0, 1/2, …, max`.
    pub fn spins_up_to(max: HalfInt) -> impl Iterator<Item = HalfInt> {
        (0..=max.twice.max(0)).map(HalfInt::from_twice)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.as_f64()
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"n"` or `"n/2"` with an optional sign.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not an integer or half-integer"));
        match s.split_once('/') {
            None => s.parse::<i32>().map(HalfInt::from_int).map_err(|_| bad()),
            Some((num, den)) => {
                if den.trim() != "2" {
                    return Err(bad());
                }
                num.trim().parse::<i32>().map(HalfInt::from_twice).map_err(|_| bad())
            }
        }
    }
}

/// Serialized as its display string, e.g. `"3/2"`.
impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Truncated formal power series `Σ_{k≤K} c_k ħᵏ` with real coefficients.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SeriesRepr", try_from = "SeriesRepr")]
pub struct HSeries {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs: Vec<f64>,
}

impl From<HSeries> for SeriesRepr {
    fn from(s: HSeries) -> Self {
        SeriesRepr { order: s.order(), coeffs: s.coeffs }
    }
}

impl TryFrom<SeriesRepr> for HSeries {
    type Error = String;
    fn try_from(r: SeriesRepr) -> std::result::Result<Self, String> {
        if r.coeffs.len() != r.order + 1 {
            return Err(format!(
                "series of order {} needs {} coefficients, found {}",
                r.order,
                r.order + 1,
                r.coeffs.len()
            ));
        }
        Ok(HSeries { coeffs: r.coeffs })
    }
}

impl HSeries {
    pub fn zero(order: usize) -> Self {
        HSeries { coeffs: vec![0.0; order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(1.0, order)
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The formal parameter ħ itself.
    pub fn hbar(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    /// Builds a series from its coefficients; the order is `coeffs.len() − 1`.
    ///
    /// Panics on an empty coefficient vector.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        HSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of ħᵏ; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Drops or zero-pads coefficients to reach `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        HSeries { coeffs }
    }

    /// Only the ħᵏ term, as a series of the same order.
    pub fn slice(&self, k: usize) -> Self {
        let mut s = Self::zero(self.order());
        if k <= self.order() {
            s.coeffs[k] = self.coeffs[k];
        }
        s
    }

    pub fn scale(&self, c: f64) -> Self {
        HSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Max-norm distance over the common order.
    pub fn distance(&self, other: &HSeries) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn approx_eq(&self, other: &HSeries, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Evaluates the truncated polynomial at a numeric ħ.
    pub fn eval(&self, hbar: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * hbar + c)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.abs() < UNIT_TOL {
            return Err(Error::NonUnitSeries(a0));
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|i| self.coeffs[i] * out[k - i]).sum();
            out[k] = -s / a0;
        }
        Ok(HSeries { coeffs: out })
    }

    /// Square root with positive constant term.
    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(Error::NonPositiveLeadingTerm(a0));
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = a0.sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|i| out[i] * out[k - i]).sum();
            out[k] = (self.coeffs[k] - s) / (2.0 * out[0]);
        }
        Ok(HSeries { coeffs: out })
    }

    pub fn div(&self, rhs: &HSeries) -> Result<Self> {
        Ok(self * &rhs.invert()?)
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::one(self.order()), |acc, _| &acc * self)
    }
}

impl fmt::Debug for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HSeries{:?}", self.coeffs)
    }
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}ħ", c.abs())?,
                _ => write!(f, "{}ħ^{k}", c.abs())?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(ħ^{})", self.order() + 1)
    }
}

fn zip_with(a: &HSeries, b: &HSeries, op: impl Fn(f64, f64) -> f64) -> HSeries {
    HSeries { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| op(*x, *y)).collect() }
}

fn cauchy(a: &HSeries, b: &HSeries) -> HSeries {
    let n = a.coeffs.len().min(b.coeffs.len());
    let mut out = vec![0.0; n];
    for (i, &x) in a.coeffs.iter().take(n).enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.coeffs.iter().take(n - i).enumerate() {
            out[i + j] += x * y;
        }
    }
    HSeries { coeffs: out }
}

macro_rules! series_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&HSeries> for &HSeries {
            type Output = HSeries;
            fn $method(self, rhs: &HSeries) -> HSeries {
                $body(self, rhs)
            }
        }
        impl $tr<HSeries> for HSeries {
            type Output = HSeries;
            fn $method(self, rhs: HSeries) -> HSeries {
                $body(&self, &rhs)
            }
        }
        impl $tr<&HSeries> for HSeries {
            type Output = HSeries;
            fn $method(self, rhs: &HSeries) -> HSeries {
                $body(&self, rhs)
            }
        }
        impl $tr<HSeries> for &HSeries {
            type Output = HSeries;
            fn $method(self, rhs: HSeries) -> HSeries {
                $body(self, &rhs)
            }
        }
    };
}

series_binop!(Add, add, |a, b| zip_with(a, b, |x, y| x + y));
series_binop!(Sub, sub, |a, b| zip_with(a, b, |x, y| x - y));
series_binop!(Mul, mul, cauchy);

impl Mul<f64> for &HSeries {
    type Output = HSeries;
    fn mul(self, c: f64) -> HSeries {
        self.scale(c)
    }
}

impl Mul<f64> for HSeries {
    type Output = HSeries;
    fn mul(self, c: f64) -> HSeries {
        self.scale(c)
    }
}

impl Neg for HSeries {
    type Output = HSeries;
    fn neg(self) -> HSeries {
        self.scale(-1.0)
    }
}

impl Neg for &HSeries {
    type Output = HSeries;
    fn neg(self) -> HSeries {
        self.scale(-1.0)
    }
}

impl AddAssign<&HSeries> for HSeries {
    fn add_assign(&mut self, rhs: &HSeries) {
        self.coeffs.truncate(rhs.coeffs.len());
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x += y;
        }
    }
}

impl SubAssign<&HSeries> for HSeries {
    fn sub_assign(&mut self, rhs: &HSeries) {
        self.coeffs.truncate(rhs.coeffs.len());
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x -= y;
        }
    }
}

impl MulAssign<&HSeries> for HSeries {
    fn mul_assign(&mut self, rhs: &HSeries) {
        *self = cauchy(self, rhs);
    }
}

/// `q^a = exp(a ħ)`.
pub fn q_power(exponent: impl Into<f64>, order: usize) -> HSeries {
    let a = exponent.into();
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut term = 1.0;
    coeffs.push(term);
    for k in 1..=order {
        term *= a / k as f64;
        coeffs.push(term);
    }
    HSeries { coeffs }
}

/// Symmetric q-integer `[n] = q^{n−1} + q^{n−3} + … + q^{−(n−1)}`.
///
/// Negative arguments follow `[−n] = −[n]`.
pub fn q_integer(n: i64, order: usize) -> HSeries {
    let m = n.unsigned_abs() as i64;
    let mut s = HSeries::zero(order);
    if m % 2 == 1 {
        s = HSeries::one(order);
    }
    // pair q^a with q^{-a} so odd powers of ħ cancel exactly
    let mut a = m - 1;
    while a > 0 {
        let p = q_power(a as f64, order);
        for (k, c) in p.coeffs().iter().enumerate() {
            if k % 2 == 0 {
                s.coeffs[k] += 2.0 * c;
            }
        }
        a -= 2;
    }
    if n < 0 {
        -s
    } else {
        s
    }
}

/// `[n]! = [1][2]…[n]`.
pub fn q_factorial(n: u32, order: usize) -> HSeries {
    (1..=n as i64).fold(HSeries::one(order), |acc, i| acc * q_integer(i, order))
}

/// Gauss binomial `[n choose k]_Q` at `Q = q^{base_exp}`.
pub fn gauss_binomial(n: i64, k: i64, base_exp: i32, order: usize) -> Result<HSeries> {
    if n < 0 || k < 0 || k > n {
        return Err(Error::IndexOutOfRange(format!("Gauss binomial needs 0 <= k <= n, got n = {n}, k = {k}")));
    }
    // Integer coefficients of the polynomial in Q, via the Q-Pascal rule
    // [n, k] = [n−1, k−1] + Q^k [n−1, k].
    let n = n as usize;
    let k = k as usize;
    let mut rows: Vec<Vec<Vec<u128>>> = vec![vec![vec![1]]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = Vec::with_capacity(i + 1);
        for kk in 0..=i {
            let mut poly = vec![0u128; kk * (i - kk) + 1];
            if kk >= 1 {
                for (d, c) in prev[kk - 1].iter().enumerate() {
                    poly[d] += c;
                }
            }
            if kk < i {
                for (d, c) in prev[kk].iter().enumerate() {
                    poly[d + kk] += c;
                }
            }
            row.push(poly);
        }
        rows.push(row);
    }
    let mut s = HSeries::zero(order);
    for (d, &c) in rows[n][k].iter().enumerate() {
        if c != 0 {
            s += &q_power((d as i64 * base_exp as i64) as f64, order).scale(c as f64);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exp_series(a: f64, order: usize) -> HSeries {
        // independent: factorials accumulated directly
        let coeffs = (0..=order).map(|k| a.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>()).collect();
        HSeries::from_coeffs(coeffs)
    }

    #[test]
    fn add_and_mul_basics() {
        let one = HSeries::one(2);
        let h = HSeries::hbar(2);
        assert_eq!((&one + &h).coeffs(), &[1.0, 1.0, 0.0]);
        let p = (&one + &h) * (&one - &h);
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn exp_times_exp_inverse_is_one() {
        let p = exp_series(1.0, 6) * exp_series(-1.0, 6);
        assert!(p.approx_eq(&HSeries::one(6), 1e-14), "{p:?}");
    }

    #[test]
    fn mixed_orders_truncate_to_min() {
        let a = HSeries::from_coeffs(vec![1.0, 2.0, 3.0]);
        let b = HSeries::from_coeffs(vec![1.0, 1.0]);
        assert_eq!((&a + &b).order(), 1);
        assert_eq!((&a * &b).coeffs(), &[1.0, 3.0]);
    }

    #[test]
    fn invert_cases() {
        assert_eq!(HSeries::one(3).invert().unwrap(), HSeries::one(3));
        let inv = (HSeries::one(3) + HSeries::hbar(3)).invert().unwrap();
        assert_eq!(inv.coeffs(), &[1.0, -1.0, 1.0, -1.0]);
        let e = q_power(1.0, 6).invert().unwrap();
        assert!(e.approx_eq(&exp_series(-1.0, 6), 1e-15));
        assert!(matches!(HSeries::hbar(3).invert(), Err(Error::NonUnitSeries(_))));
    }

    #[test]
    fn sqrt_cases() {
        assert_eq!(HSeries::one(4).sqrt().unwrap(), HSeries::one(4));
        assert_eq!(HSeries::constant(4.0, 4).sqrt().unwrap(), HSeries::constant(2.0, 4));
        let two = q_integer(2, 8);
        let r = two.sqrt().unwrap();
        assert!((&r * &r).approx_eq(&two, 1e-12));
        assert!(matches!(HSeries::constant(-1.0, 2).sqrt(), Err(Error::NonPositiveLeadingTerm(_))));
        assert!(matches!(HSeries::zero(2).sqrt(), Err(Error::NonPositiveLeadingTerm(_))));
    }

    #[test]
    fn q_power_is_exponential() {
        assert_eq!(q_power(0.0, 5), HSeries::one(5));
        assert!(q_power(1.0, 6).approx_eq(&exp_series(1.0, 6), 1e-15));
        assert!((q_power(-2.0, 8) * q_power(2.0, 8)).approx_eq(&HSeries::one(8), 1e-12));
        assert!(q_power(HalfInt::from_twice(3), 4).approx_eq(&exp_series(1.5, 4), 1e-15));
    }

    #[test]
    fn q_integer_values() {
        assert_eq!(q_integer(0, 4), HSeries::zero(4));
        assert_eq!(q_integer(1, 4), HSeries::one(4));
        // 2 cosh ħ = 2 + ħ² + ħ⁴/12 + ħ⁶/360
        let expect = HSeries::from_coeffs(vec![2.0, 0.0, 1.0, 0.0, 1.0 / 12.0, 0.0, 1.0 / 360.0]);
        assert!(q_integer(2, 6).approx_eq(&expect, 1e-15));
        assert!(q_integer(-3, 4).approx_eq(&-q_integer(3, 4), 0.0));
    }

    #[test]
    fn q_integer_matches_quotient_definition() {
        // (qⁿ − q⁻ⁿ)/(q − q⁻¹) with both sides divided by ħ before inverting
        for n in 1..7 {
            let order = 6;
            let num = q_power(n as f64, order + 1) - q_power(-(n as f64), order + 1);
            let den = q_power(1.0, order + 1) - q_power(-1.0, order + 1);
            let num = HSeries::from_coeffs(num.coeffs()[1..].to_vec());
            let den = HSeries::from_coeffs(den.coeffs()[1..].to_vec());
            let expect = num.div(&den).unwrap();
            assert!(q_integer(n, order).approx_eq(&expect, 1e-11), "n = {n}");
        }
    }

    #[test]
    fn factorial_and_binomial_classical_limits() {
        assert_eq!(q_factorial(0, 3), HSeries::one(3));
        assert_eq!(q_factorial(1, 3), HSeries::one(3));
        assert_eq!(q_factorial(3, 3).constant_term(), 6.0);
        let mut fact = 1.0;
        for n in 0..=8u32 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((q_factorial(n, 6).constant_term() - fact).abs() < 1e-12);
            assert!((q_integer(n as i64, 6).constant_term() - n as f64).abs() < 1e-12);
            let mut binom = 1.0;
            for k in 0..=n as i64 {
                let g = gauss_binomial(n as i64, k, -2, 6).unwrap();
                assert!((g.constant_term() - binom).abs() < 1e-12);
                binom = binom * (n as i64 - k) as f64 / (k + 1) as f64;
            }
        }
    }

    #[test]
    fn gauss_binomial_values() {
        assert_eq!(gauss_binomial(5, 0, -2, 4).unwrap(), HSeries::one(4));
        // (1 − Q²)/(1 − Q) = 1 + Q at Q = e^{−2ħ}
        let g = gauss_binomial(2, 1, -2, 6).unwrap();
        let expect = HSeries::one(6) + exp_series(-2.0, 6);
        assert!(g.approx_eq(&expect, 1e-14));
        assert_eq!(&g.coeffs()[..3], &[2.0, -2.0, 2.0]);
        assert_eq!(gauss_binomial(4, 2, -2, 3).unwrap().constant_term(), 6.0);
        assert!(matches!(gauss_binomial(3, 4, -2, 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(gauss_binomial(3, -1, -2, 2), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn gauss_binomial_product_formula_at_numeric_q() {
        // ∏ (1 − Q^{n−i+1})/(1 − Q^i) evaluated at a small numeric ħ
        let hbar: f64 = 1e-2;
        for n in 0..7i64 {
            for k in 0..=n {
                let big_q = (-2.0 * hbar).exp();
                let prod: f64 =
                    (1..=k).map(|i| (1.0 - big_q.powi((n - i + 1) as i32)) / (1.0 - big_q.powi(i as i32))).product();
                let g = gauss_binomial(n, k, -2, 12).unwrap().eval(hbar);
                assert!((g - prod).abs() < 1e-10 * prod.max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gauss_binomial_symmetry() {
        for n in 0..8 {
            for k in 0..=n {
                let a = gauss_binomial(n, k, -2, 6).unwrap();
                let b = gauss_binomial(n, n - k, -2, 6).unwrap();
                assert!(a.approx_eq(&b, 1e-12));
            }
        }
    }

    #[test]
    fn halfint_parse_and_display() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!(" 2 ".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
        assert!("x".parse::<HalfInt>().is_err());
        assert!("1/3".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_twice(-3).to_string(), "-3/2");
        assert_eq!(HalfInt::from_twice(4).to_string(), "2");
        let w: Vec<_> = HalfInt::from_twice(3).weights().map(|m| m.twice()).collect();
        assert_eq!(w, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn json_encoding() {
        let s = HSeries::from_coeffs(vec![1.0, 0.5, -0.25]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"order":2,"coeffs":[1.0,0.5,-0.25]}"#);
        assert_eq!(serde_json::from_str::<HSeries>(&j).unwrap(), s);
        assert!(serde_json::from_str::<HSeries>(r#"{"order":3,"coeffs":[1.0]}"#).is_err());
    }

    fn series(order: usize) -> impl Strategy<Value = HSeries> {
        prop::collection::vec(-2.0f64..2.0, order + 1).prop_map(HSeries::from_coeffs)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in series(8), b in series(8), c in series(8)) {
            prop_assert!(((&a * &b) * &c).approx_eq(&(&a * (&b * &c)), 1e-12));
            prop_assert!((&a * (&b + &c)).approx_eq(&(&a * &b + &a * &c), 1e-12));
            prop_assert!((&a * &b).approx_eq(&(&b * &a), 1e-12));
        }

        #[test]
        fn invert_and_sqrt_are_inverses(mut a in series(8)) {
            a = a + HSeries::constant(3.0, 8);
            let inv = a.invert().unwrap();
            prop_assert!((&a * &inv).approx_eq(&HSeries::one(8), 1e-10));
            let r = a.sqrt().unwrap();
            prop_assert!(r.constant_term() > 0.0);
            prop_assert!((&r * &r).approx_eq(&a, 1e-10));
        }

        #[test]
        fn q_integer_is_even_in_hbar(n in 0i64..10) {
            let s = q_integer(n, 7);
            for k in (1..=7).step_by(2) {
                prop_assert_eq!(s.coeff(k), 0.0);
            }
        }
    }
}
