//! Truncated complex power series on the unit disk.
//!
//! A [`TruncatedSeries`] stores the coefficients `c_l .. c_N` of
//! `Σ c_k ζ^k`, where `l` is the lowest index (it may be negative for the
//! finite Laurent parts needed by the Kirillov variations) and `N` is the
//! truncation order. Binary operations require equal `N`; use
//! [`TruncatedSeries::retruncate`] to change it explicitly.
//!
//! Every series also tracks how many of its top coefficients are no longer
//! exact because an operation reached past the truncation (differentiation
//! shifts unknown coefficients down, negative powers pull them in). This is
//! reported by [`TruncatedSeries::exact_through`].

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for runs.
pub const DEFAULT_ORDER: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    order: usize,
    lowest: i32,
    coeffs: Vec<Complex64>,
    padding: usize,
}

impl TruncatedSeries {
    /// Builds a series from `c_lowest ..= c_order`.
    pub fn new(order: usize, lowest: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        if lowest > order as i32 {
            return Err(Error::InvalidArgument(format!(
                "lowest index {lowest} exceeds order {order}"
            )));
        }
        let expected = (order as i32 - lowest + 1) as usize;
        if coeffs.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} coefficients for indices {lowest}..={order}, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { order, lowest, coeffs, padding: 0 })
    }

    pub fn zeros(order: usize, lowest: i32) -> Self {
        let lowest = lowest.min(order as i32);
        let len = (order as i32 - lowest + 1) as usize;
        Self { order, lowest, coeffs: vec![Complex64::zero(); len], padding: 0 }
    }

    /// Power series `c_0 + c_1 ζ + ...`; missing coefficients are zero and
    /// coefficients beyond `order` are dropped.
    pub fn from_coeffs(order: usize, coeffs: &[Complex64]) -> Self {
        let mut s = Self::zeros(order, 0);
        for (k, c) in coeffs.iter().take(order + 1).enumerate() {
            s.coeffs[k] = *c;
        }
        s
    }

    pub fn from_real(order: usize, coeffs: &[f64]) -> Self {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_coeffs(order, &c)
    }

    pub fn constant(order: usize, value: Complex64) -> Self {
        Self::from_coeffs(order, &[value])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, Complex64::new(1.0, 0.0))
    }

    /// `value · ζ^k`, for `lowest ≤ k ≤ order` with the lowest index at `min(k, 0)`.
    pub fn monomial(order: usize, k: i32, value: Complex64) -> Self {
        let mut s = Self::zeros(order, k.min(0));
        if k <= order as i32 {
            s.set(k, value);
        }
        s
    }

    /// The identity map `ζ`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(order, 1, Complex64::new(1.0, 0.0))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lowest_index(&self) -> i32 {
        self.lowest
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of top coefficients that are zero fill or contaminated by
    /// unknown coefficients past the truncation.
    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Highest index whose coefficient is exact.
    pub fn exact_through(&self) -> i32 {
        self.order as i32 - self.padding as i32
    }

    /// Coefficient of `ζ^k`; zero outside the stored range.
    pub fn coeff(&self, k: i32) -> Complex64 {
        if k < self.lowest || k > self.order as i32 {
            Complex64::zero()
        } else {
            self.coeffs[(k - self.lowest) as usize]
        }
    }

    fn set(&mut self, k: i32, value: Complex64) {
        let idx = (k - self.lowest) as usize;
        self.coeffs[idx] = value;
    }

    fn with_known(mut self, known: i32) -> Self {
        let known = known.min(self.order as i32);
        self.padding = (self.order as i32 - known).max(0) as usize;
        self
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| i as i32 + self.lowest)
    }

    /// Explicit change of truncation order (drops or zero-extends the top).
    pub fn retruncate(&self, order: usize) -> Self {
        let lowest = self.lowest.min(order as i32);
        let mut out = Self::zeros(order, lowest);
        for k in lowest..=order as i32 {
            out.set(k, self.coeff(k));
        }
        let known = if order > self.order { self.exact_through() } else { order as i32 };
        out.with_known(known.min(self.exact_through()))
    }

    /// Same coefficients stored from a different lowest index; dropped
    /// entries must be zero.
    pub fn rebased(&self, lowest: i32) -> Result<Self> {
        let lowest = lowest.min(self.order as i32);
        for k in self.lowest..lowest {
            if !self.coeff(k).is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "cannot rebase to lowest index {lowest}: coefficient {k} is nonzero"
                )));
            }
        }
        let mut out = Self::zeros(self.order, lowest);
        for k in lowest..=self.order as i32 {
            out.set(k, self.coeff(k));
        }
        out.padding = self.padding;
        Ok(out)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_order(other)?;
        let lowest = self.lowest.min(other.lowest);
        let mut out = Self::zeros(self.order, lowest);
        for k in lowest..=self.order as i32 {
            out.set(k, op(self.coeff(k), other.coeff(k)));
        }
        Ok(out.with_known(self.exact_through().min(other.exact_through())))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Adds a constant to the `ζ^0` coefficient.
    pub fn add_constant(&self, value: Complex64) -> Self {
        let mut out = if self.lowest > 0 {
            // lowest > 0 means the ζ^0 slot is absent; rebase is infallible here
            self.rebased(0).expect("rebasing down never drops coefficients")
        } else {
            self.clone()
        };
        let c = out.coeff(0);
        out.set(0, c + value);
        out
    }

    /// Cauchy product truncated at the common order.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order as i32;
        let lowest = self.lowest + other.lowest;
        let known = (self.exact_through() + other.lowest)
            .min(other.exact_through() + self.lowest)
            .min(n);
        if lowest > n {
            return Ok(Self::zeros(self.order, n).with_known(known));
        }
        let mut out = Self::zeros(self.order, lowest);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ki = self.lowest + i as i32;
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = ki + other.lowest + j as i32;
                if k > n {
                    break;
                }
                let idx = (k - lowest) as usize;
                out.coeffs[idx] += a * b;
            }
        }
        Ok(out.with_known(known))
    }

    /// `self^power` for `power ≥ 0`.
    pub fn powi(&self, power: u32) -> Result<Self> {
        let mut acc = Self::one(self.order);
        for _ in 0..power {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse. A series `ζ^v g(ζ)` with `g(0) ≠ 0` inverts
    /// to `ζ^{-v} / g`.
    pub fn reciprocal(&self) -> Result<Self> {
        let v = self.valuation().ok_or(Error::VanishingLeadingCoefficient)?;
        let n = self.order as i32;
        let g = |j: i32| self.coeff(v + j);
        let g0 = g(0);
        if g0.norm() < f64::MIN_POSITIVE {
            return Err(Error::VanishingLeadingCoefficient);
        }
        let lowest = -v;
        let len = (n - lowest + 1) as usize;
        let mut inv = vec![Complex64::zero(); len];
        inv[0] = g0.inv();
        for j in 1..len {
            let mut acc = Complex64::zero();
            for i in 1..=j {
                let gi = g(i as i32);
                if !gi.is_zero() {
                    acc += gi * inv[j - i];
                }
            }
            inv[j] = -acc * inv[0];
        }
        let out = Self { order: self.order, lowest, coeffs: inv, padding: 0 };
        Ok(out.with_known(self.exact_through() - 2 * v))
    }

    /// `self / other` as `self · other⁻¹`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.reciprocal()?)
    }

    /// Termwise derivative, re-padded to the same order.
    pub fn differentiate(&self) -> Self {
        let n = self.order as i32;
        let lowest = if self.lowest == 0 { 0 } else { self.lowest - 1 };
        let mut out = Self::zeros(self.order, lowest);
        for k in self.lowest.max(lowest + 1)..=n {
            if k == 0 {
                continue;
            }
            out.set(k - 1, self.coeff(k) * k as f64);
        }
        out.with_known(self.exact_through() - 1)
    }

    /// Multiplication by `ζ^m` (`m` may be negative).
    pub fn shift(&self, m: i32) -> Self {
        let n = self.order as i32;
        let lowest = (self.lowest + m).min(n);
        let mut out = Self::zeros(self.order, lowest);
        for k in self.lowest..=n {
            let target = k + m;
            if target >= lowest && target <= n {
                out.set(target, self.coeff(k));
            }
        }
        out.with_known(self.exact_through() + m)
    }

    /// `outer ∘ inner` by Horner's scheme; `inner` must vanish at the origin.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_order(inner)?;
        if self.lowest < 0 {
            return Err(Error::InvalidArgument(
                "outer series of a composition must be a power series".into(),
            ));
        }
        match inner.valuation() {
            Some(v) if v < 1 => return Err(Error::NonzeroConstantTerm),
            _ => {}
        }
        if inner.lowest < 0 && (inner.lowest..1).any(|k| !inner.coeff(k).is_zero()) {
            return Err(Error::NonzeroConstantTerm);
        }
        let inner = inner.rebased(1.min(self.order as i32))?;
        let n = self.order as i32;
        let mut acc = Self::constant(self.order, self.coeff(n));
        for k in (0..n).rev() {
            acc = acc.mul(&inner)?.add_constant(self.coeff(k));
        }
        let known = self.exact_through().min(inner.exact_through());
        Ok(acc.with_known(known))
    }

    /// Value at a point of the disk.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        if self.lowest == 0 {
            acc
        } else {
            acc * z.powi(self.lowest)
        }
    }

    /// Values `Σ c_k e^{ikθ}` at the given angles.
    pub fn evaluate_on_circle(&self, angles: &[f64]) -> Vec<Complex64> {
        angles.iter().map(|&t| self.evaluate(Complex64::from_polar(1.0, t))).collect()
    }

    /// Inverse of [`Self::evaluate_on_circle`] on the uniform grid
    /// `θ_j = 2πj/M`: discrete Fourier coefficients for `lowest ..= order`.
    pub fn fourier_project(samples: &[Complex64], order: usize, lowest: i32) -> Self {
        let m = samples.len() as f64;
        let mut out = Self::zeros(order, lowest);
        for k in out.lowest..=order as i32 {
            let mut acc = Complex64::zero();
            for (j, s) in samples.iter().enumerate() {
                let theta = 2.0 * PI * j as f64 / m;
                acc += s * Complex64::from_polar(1.0, -(k as f64) * theta);
            }
            out.set(k, acc / m);
        }
        out
    }

    /// Schwarzian derivative `f'''/f' - (3/2)(f''/f')^2`, kept through index
    /// `N - 3` and zero above.
    pub fn schwarzian(&self) -> Result<Self> {
        if self.coeff(1).norm() < f64::MIN_POSITIVE {
            return Err(Error::VanishingLeadingCoefficient);
        }
        let d1 = self.differentiate().rebased(0)?;
        let d2 = d1.differentiate();
        let d3 = d2.differentiate();
        let inv = d1.reciprocal()?;
        let h = d2.mul(&inv)?;
        let s = d3.mul(&inv)?.sub(&h.mul(&h)?.scale_real(1.5))?;
        let keep = s.exact_through();
        let mut out = s.clone();
        for k in (keep + 1).max(out.lowest)..=out.order as i32 {
            out.set(k, Complex64::zero());
        }
        Ok(out)
    }

    /// `f''/f'` as a power series.
    pub fn pre_schwarzian(&self) -> Result<Self> {
        let d1 = self.differentiate().rebased(0)?;
        d1.differentiate().div(&d1)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Uniform angles `2πj/M`, `j = 0..M`.
pub fn uniform_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// Coefficients `a_1 .. a_N` of a map `f(ζ) = a_1 ζ + a_2 ζ^2 + ...` with
/// `a_1 > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivalentCoefficients {
    a: Vec<Complex64>,
}

impl UnivalentCoefficients {
    /// Accepts `a_1 .. a_N`; `a_1` must be real and positive.
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        let Some(a1) = a.first() else {
            return Err(Error::InvalidArgument("empty coefficient vector".into()));
        };
        if !(a1.re > 0.0) || a1.im.abs() > 1e-12 * a1.re.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "a_1 must be real and positive, got {a1}"
            )));
        }
        Ok(Self { a })
    }

    /// No check on `a_1`; for intermediate Runge-Kutta stages and velocities.
    pub(crate) fn new_unchecked(a: Vec<Complex64>) -> Self {
        Self { a }
    }

    pub fn identity(order: usize) -> Self {
        let mut a = vec![Complex64::zero(); order];
        a[0] = Complex64::new(1.0, 0.0);
        Self { a }
    }

    /// `e^t ζ`.
    pub fn scaled_identity(order: usize, t: f64) -> Self {
        let mut s = Self::identity(order);
        s.a[0] = Complex64::new(t.exp(), 0.0);
        s
    }

    /// Koebe function `ζ/(1-ζ)^2` truncated at `order`.
    pub fn koebe(order: usize) -> Self {
        Self { a: (1..=order).map(|k| Complex64::new(k as f64, 0.0)).collect() }
    }

    /// `ζ + c_2 ζ^2 + ...` from the tail coefficients, padded to `order`.
    pub fn from_tail(order: usize, tail: &[Complex64]) -> Self {
        let mut s = Self::identity(order);
        for (i, c) in tail.iter().take(order.saturating_sub(1)).enumerate() {
            s.a[i + 1] = *c;
        }
        s
    }

    pub fn from_series(s: &TruncatedSeries) -> Result<Self> {
        if !s.coeff(0).is_zero() || (s.lowest_index()..0).any(|k| !s.coeff(k).is_zero()) {
            return Err(Error::InvalidArgument("map must vanish at the origin".into()));
        }
        Self::new((1..=s.order() as i32).map(|k| s.coeff(k)).collect())
    }

    pub fn to_series(&self) -> TruncatedSeries {
        let mut s = TruncatedSeries::zeros(self.order(), 1);
        for (i, c) in self.a.iter().enumerate() {
            s.set(i as i32 + 1, *c);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// `a_k`, 1-based; zero beyond the order.
    pub fn a(&self, k: usize) -> Complex64 {
        if k == 0 || k > self.a.len() {
            Complex64::zero()
        } else {
            self.a[k - 1]
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.a
    }

    pub fn a1(&self) -> f64 {
        self.a[0].re
    }

    /// Rescaled map `f/a_1`, whose coefficients are the affine coordinates
    /// `c_k = a_k / a_1`.
    pub fn normalized(&self) -> Self {
        let a1 = self.a1();
        Self { a: self.a.iter().map(|c| c / a1).collect() }
    }

    /// `c_k = a_k / a_1`.
    pub fn c(&self, k: usize) -> Complex64 {
        self.a(k) / self.a1()
    }

    /// `e^{-iα} f(e^{iα} ζ)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, alpha * i as f64))
            .collect();
        Self { a }
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in self.a.iter().rev() {
            acc = acc * z + c;
        }
        acc * z
    }

    /// `f'(z)`.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for (i, c) in self.a.iter().enumerate().rev() {
            acc = acc * z + c * (i + 1) as f64;
        }
        acc
    }

    /// `(f'(z), f''(z), f'''(z))` by Horner's scheme with derivatives.
    pub fn derivatives_at(&self, z: Complex64) -> [Complex64; 3] {
        let mut p = Complex64::zero();
        let mut d1 = Complex64::zero();
        let mut d2 = Complex64::zero();
        let mut d3 = Complex64::zero();
        // a_N .. a_1, then the zero constant term
        for c in self.a.iter().rev().chain(std::iter::once(&Complex64::zero())) {
            d3 = d3 * z + d2;
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        [d1, d2 * 2.0, d3 * 6.0]
    }
}
