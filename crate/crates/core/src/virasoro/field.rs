//! Complexified vector fields on the circle, the Witt bracket, the
//! Gelfand-Fuks cocycle and the Virasoro bracket.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ω(e^{imθ}, e^{-imθ}) / (m(m²-1))` on the exponential basis.
pub const EXPONENTIAL_CENTRAL_CONSTANT: Complex64 = Complex64::new(0.0, 0.5);
/// The same constant on the basis `ν_k = -i e^{ikθ}`.
pub const NU_BASIS_CENTRAL_CONSTANT: Complex64 = Complex64::new(0.0, -0.5);

/// `ν(e^{iθ}) = Σ_{|k|≤K} ν̂_k e^{ikθ}`, extended to `w` as the Laurent
/// polynomial `Σ ν̂_k w^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleVectorField {
    k_max: usize,
    /// Modes `-K ..= K`.
    fourier: Vec<Complex64>,
}

impl CircleVectorField {
    pub fn zero(k_max: usize) -> Self {
        Self { k_max, fourier: vec![Complex64::zero(); 2 * k_max + 1] }
    }

    /// From modes `-K ..= K`.
    pub fn from_modes(fourier: Vec<Complex64>) -> Result<Self> {
        if fourier.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "a field needs an odd number of modes -K..=K, got {}",
                fourier.len()
            )));
        }
        Ok(Self { k_max: fourier.len() / 2, fourier })
    }

    /// `value · e^{ikθ}`.
    pub fn mode_field(k: i64, value: Complex64) -> Self {
        let mut f = Self::zero(k.unsigned_abs() as usize);
        f.set(k, value);
        f
    }

    /// `e^{ikθ}`.
    pub fn exponential(k: i64) -> Self {
        Self::mode_field(k, Complex64::new(1.0, 0.0))
    }

    /// `ν_k = -i e^{ikθ}`.
    pub fn nu(k: i64) -> Self {
        Self::mode_field(k, -I)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn fourier(&self) -> &[Complex64] {
        &self.fourier
    }

    pub fn mode(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            Complex64::zero()
        } else {
            self.fourier[(k + self.k_max as i64) as usize]
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        let idx = (k + self.k_max as i64) as usize;
        self.fourier[idx] = value;
    }

    fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k = self.k_max as i64;
        (-k..=k).map(move |m| (m, self.mode(m))).filter(|(_, c)| !c.is_zero())
    }

    /// Re-expressed with `K' ≥ K` modes.
    pub fn widened(&self, k_max: usize) -> Self {
        let mut out = Self::zero(k_max.max(self.k_max));
        for (k, c) in self.modes() {
            out.set(k, c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.widened(other.k_max);
        for (k, c) in other.modes() {
            let v = out.mode(k);
            out.set(k, v + c);
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { k_max: self.k_max, fourier: self.fourier.iter().map(|c| c * factor).collect() }
    }

    /// `dν/dθ`.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for (k, c) in self.modes() {
            out.set(k, c * I * k as f64);
        }
        out
    }

    /// Pointwise product on the circle.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.k_max + other.k_max);
        for (m, a) in self.modes() {
            for (n, b) in other.modes() {
                let v = out.mode(m + n);
                out.set(m + n, v + a * b);
            }
        }
        out
    }

    /// `Σ ν̂_k w^k`; on the unit circle this is `ν(e^{iθ})`.
    pub fn evaluate(&self, w: Complex64) -> Complex64 {
        self.modes().map(|(k, c)| c * w.powi(k as i32)).sum()
    }

    pub fn evaluate_angle(&self, theta: f64) -> Complex64 {
        self.evaluate(Complex64::from_polar(1.0, theta))
    }

    pub fn max_abs(&self) -> f64 {
        self.fourier.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `[φ, ψ] = φψ' - φ'ψ`.
pub fn witt_bracket(phi: &CircleVectorField, psi: &CircleVectorField) -> CircleVectorField {
    let a = phi.product(&psi.derivative());
    let b = phi.derivative().product(psi);
    a.add(&b.scale(Complex64::new(-1.0, 0.0)))
}

/// `ω(φ, ψ) = -(1/4π) ∫ (φ' + φ''') ψ dθ = (i/2) Σ_m φ̂_m ψ̂_{-m} m(m²-1)`.
pub fn gelfand_fuks(phi: &CircleVectorField, psi: &CircleVectorField) -> Complex64 {
    phi.modes()
        .map(|(m, a)| {
            let mf = m as f64;
            a * psi.mode(-m) * (mf * (mf * mf - 1.0))
        })
        .sum::<Complex64>()
        * EXPONENTIAL_CENTRAL_CONSTANT
}

/// `φ∂ + a` in the centrally extended algebra (`a` is the central part).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirasoroElement {
    pub field: CircleVectorField,
    pub central: Complex64,
}

impl VirasoroElement {
    pub fn new(field: CircleVectorField, central: Complex64) -> Self {
        Self { field, central }
    }

    pub fn central(value: Complex64) -> Self {
        Self { field: CircleVectorField::zero(0), central: value }
    }
}

/// `[φ∂ + ca, ψ∂ + cb] = [φ, ψ]∂ + (c/12) ω(φ, ψ)`.
pub fn virasoro_bracket(x: &VirasoroElement, y: &VirasoroElement, charge: f64) -> VirasoroElement {
    VirasoroElement {
        field: witt_bracket(&x.field, &y.field),
        central: gelfand_fuks(&x.field, &y.field) * (charge / 12.0),
    }
}

/// Central part of `[ν_m, ν_n]` divided by the basis constant, so that
/// `[ν_m, ν_n] = (n - m) ν_{m+n} + (c/12) m(m²-1) δ_{m+n,0}`.
pub fn normalized_mode_central(m: i64, n: i64, charge: f64) -> Complex64 {
    let b = virasoro_bracket(
        &VirasoroElement::new(CircleVectorField::nu(m), Complex64::zero()),
        &VirasoroElement::new(CircleVectorField::nu(n), Complex64::zero()),
        charge,
    );
    b.central / NU_BASIS_CENTRAL_CONSTANT
}
