//! Truncated formal power series over exact rationals.
//!
//! A series of order `N` knows the coefficients of `q^0..=q^N`; everything
//! above is unknown (not zero). Binary operations return a series whose
//! order is the minimum of the inputs' orders.

mod lambert;
mod ode;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{format_rational, int, Rational};

pub use lambert::{lambert_w, w_even_combo};
pub use ode::{lemma_ode_residual, lemma_ode_residual_of, ode_residual};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("{op}: constant term must be {required}, got {got}")]
    ConstantTerm { op: &'static str, required: &'static str, got: String },
    #[error("{op}: coefficient of x^{index} must be nonzero")]
    VanishingCoefficient { op: &'static str, index: usize },
    #[error("{op}: argument must be nonzero")]
    ZeroArgument { op: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    /// Zero series known to `order`.
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![Rational::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The formal variable, `q` (or `x`).
    pub fn var(order: usize) -> Self {
        Self::monomial(Rational::one(), 1, order)
    }

    /// `c * q^k` known to `order`.
    pub fn monomial(c: Rational, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// Coefficients `c_0..=c_N`; the order is `len - 1`. Panics on empty input.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    /// Builds `sum_n f(n) q^n` for `n <= order`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Rational) -> Self {
        Self { coeffs: (0..=order).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplication by `q^k`; the known order grows by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// `f(c q)`: coefficient `n` is multiplied by `c^n`.
    pub fn dilate(&self, c: &Rational) -> Self {
        let mut pow = Rational::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a * &pow);
            pow *= c;
        }
        Self { coeffs }
    }

    /// Ordinary derivative; the known order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: (1..self.coeffs.len()).map(|n| &self.coeffs[n] * int(n as i64)).collect(),
        }
    }

    /// `q d/dq`: coefficient of `q^n` multiplied by `n`.
    pub fn q_d_dq(&self) -> Self {
        Self::from_fn(self.order(), |n| &self.coeffs[n] * int(n as i64))
    }

    /// `q d/dq - c`.
    pub fn euler_shift(&self, c: i64) -> Self {
        Self::from_fn(self.order(), |n| &self.coeffs[n] * int(n as i64 - c))
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::ConstantTerm {
                op: "recip",
                required: "nonzero",
                got: "0".into(),
            });
        }
        let inv0 = c0.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..self.coeffs.len() {
            let mut acc = Rational::zero();
            for k in 1..=n {
                acc += &self.coeffs[k] * &out[n - k];
            }
            out.push(-acc * &inv0);
        }
        Ok(Self { coeffs: out })
    }

    /// `exp(a)` for `a` with zero constant term, from `n e_n = sum_k k a_k e_{n-k}`.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        self.require_constant("exp", false)?;
        let mut e: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        e.push(Rational::one());
        for n in 1..self.coeffs.len() {
            let mut acc = Rational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * int(k as i64) * &e[n - k];
                }
            }
            e.push(acc / int(n as i64));
        }
        Ok(Self { coeffs: e })
    }

    /// `log(a)` for `a` with constant term one.
    pub fn log(&self) -> Result<Self, SeriesError> {
        self.require_constant("log", true)?;
        let mut l: Vec<Rational> = vec![Rational::zero(); self.coeffs.len()];
        for n in 1..self.coeffs.len() {
            let mut acc = &self.coeffs[n] * int(n as i64);
            for (k, lk) in l.iter().enumerate().take(n).skip(1) {
                acc -= lk * int(k as i64) * &self.coeffs[n - k];
            }
            l[n] = acc / int(n as i64);
        }
        Ok(Self { coeffs: l })
    }

    /// `self^k` for `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `self(inner(q))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        inner.require_constant("compose", false)?;
        let order = self.order().min(inner.order());
        let inner = inner.truncate(order);
        // Horner in the inner series.
        let mut acc = Self::constant(self.coeffs[order].clone(), order);
        for c in self.coeffs[..order].iter().rev() {
            acc = &acc * &inner;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `g(self(x)) = x` to the known order,
    /// via the Lagrange coefficient formula
    /// `[x^n] g = (1/n) [w^{n-1}] (w / phi(w))^n`.
    pub fn lagrange_invert(&self) -> Result<Self, SeriesError> {
        self.require_constant("lagrange_invert", false)?;
        if self.order() < 1 || self.coeffs[1].is_zero() {
            return Err(SeriesError::VanishingCoefficient { op: "lagrange_invert", index: 1 });
        }
        let order = self.order();
        // phi(w) / w, known to order - 1
        let quotient = Self { coeffs: self.coeffs[1..].to_vec() };
        let psi = quotient.recip()?;
        let mut out = vec![Rational::zero(); order + 1];
        let mut power = Self::one(psi.order());
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            power = &power * &psi;
            *slot = power.coeff(n - 1) / int(n as i64);
        }
        Ok(Self { coeffs: out })
    }

    /// Index of the first coefficient (up to the smaller order) where `self`
    /// and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let order = self.order().min(other.order());
        (0..=order).find(|&n| self.coeffs[n] != other.coeffs[n])
    }

    /// Coefficients as exact `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    fn require_constant(&self, op: &'static str, one: bool) -> Result<(), SeriesError> {
        let c0 = &self.coeffs[0];
        let ok = if one { c0.is_one() } else { c0.is_zero() };
        if ok {
            Ok(())
        } else {
            Err(SeriesError::ConstantTerm {
                op,
                required: if one { "1" } else { "0" },
                got: format_rational(c0),
            })
        }
    }
}

/// Cauchy product truncated to the smaller order.
pub fn mul(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
    a * b
}

pub fn exp_series(a: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    a.exp()
}

pub fn q_d_dq(a: &TruncatedSeries) -> TruncatedSeries {
    a.q_d_dq()
}

/// `(d/dq - 1/q) f`, taken coefficient-wise as `f_n q^n -> (n-1) f_n q^{n-1}`.
/// Needs `f_0 = 0` so that no `q^{-1}` term appears; the known order drops by one.
pub fn a_from_f(f: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    f.require_constant("a_from_f", false)?;
    if f.order() == 0 {
        return Ok(TruncatedSeries::zero(0));
    }
    Ok(TruncatedSeries::from_fn(f.order() - 1, |m| f.coeff(m + 1) * int(m as i64)))
}

/// `(q d/dq) f / 4`.
pub fn b_from_f(f: &TruncatedSeries) -> TruncatedSeries {
    f.q_d_dq().scale(&Rational::new(1.into(), 4.into()))
}

pub fn lagrange_invert(phi: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    phi.lagrange_invert()
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |n| &self.coeffs[n] + &rhs.coeffs[n])
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |n| &self.coeffs[n] - &rhs.coeffs[n])
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $m(self, rhs: Self) -> TruncatedSeries {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        -&self
    }
}

/// `c0 + c1*q + ... + cN*q^N + O(q^{N+1})`, zero terms omitted.
impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = format_rational(c);
            terms.push(match n {
                0 => c,
                1 => format!("{c}*q"),
                _ => format!("{c}*q^{n}"),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{} + O(q^{})", terms.join(" + "), self.order() + 1)
    }
}
