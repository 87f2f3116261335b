//! Driving terms `p(ζ, t)` of the Loewner-Kufarev equation.
//!
//! A smooth driver is given by a boundary density `ν(e^{iθ})` on the circle
//! with `ν > 0` and `∫ν dθ = 4π`. Its Herglotz function is built from the
//! Schwarz kernel, so that `p(0) = 1` and `Re p(e^{iθ}) = ν(θ)/2`; in
//! coefficients `p_k = ν̂_k` for `k ≥ 1`.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{uniform_angles, TruncatedSeries, UnivalentCoefficients};

/// Grid minimum below which a density counts as non-positive.
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;
/// Allowed deviation of `ν̂_0` from 2 (and of `Im ν̂_0` from 0).
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// `|f'|` on the circle below this stops Laplacian growth.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Fourier form of a real density: `ν(θ) = Σ_{|k|≤K} ν̂_k e^{ikθ}` with
/// `ν̂_{-k} = conj(ν̂_k)`, so only `k = 0..=K` is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDensity {
    #[serde(rename = "K")]
    k_max: usize,
    nu_hat: Vec<Complex64>,
}

impl BoundaryDensity {
    /// Unvalidated density from `ν̂_0 ..= ν̂_K`.
    pub fn new(nu_hat: Vec<Complex64>) -> Result<Self> {
        if nu_hat.is_empty() {
            return Err(Error::InvalidDensity("empty Fourier coefficient list".into()));
        }
        Ok(Self { k_max: nu_hat.len() - 1, nu_hat })
    }

    /// `ν ≡ 2`.
    pub fn uniform() -> Self {
        Self { k_max: 0, nu_hat: vec![Complex64::new(2.0, 0.0)] }
    }

    /// `ν = 2 + Σ (a_k cos kθ + b_k sin kθ)` from `(k, a_k, b_k)` triples.
    pub fn from_trig(terms: &[(usize, f64, f64)]) -> Self {
        let k_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut nu_hat = vec![Complex64::zero(); k_max + 1];
        nu_hat[0] = Complex64::new(2.0, 0.0);
        for &(k, a, b) in terms {
            if k == 0 {
                nu_hat[0] += a;
            } else {
                nu_hat[k] += Complex64::new(a / 2.0, -b / 2.0);
            }
        }
        Self { k_max, nu_hat }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn nu_hat(&self) -> &[Complex64] {
        &self.nu_hat
    }

    /// `ν̂_k` for any integer `k`.
    pub fn mode(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx > self.k_max {
            return Complex64::zero();
        }
        if k >= 0 {
            self.nu_hat[idx]
        } else {
            self.nu_hat[idx].conj()
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        let mut v = self.nu_hat[0].re;
        for (k, c) in self.nu_hat.iter().enumerate().skip(1) {
            v += 2.0 * (c * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        v
    }

    pub fn values(&self, angles: &[f64]) -> Vec<f64> {
        angles.iter().map(|&t| self.value(t)).collect()
    }

    /// Positivity is checked on this many uniform points.
    pub fn check_grid_size(&self) -> usize {
        (4 * self.k_max).max(16)
    }

    pub fn validate(&self) -> DensityDiagnostics {
        let grid = uniform_angles(self.check_grid_size());
        let (argmin, min_value) = grid
            .iter()
            .map(|&t| (t, self.value(t)))
            .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        DensityDiagnostics {
            min_value,
            argmin,
            grid_size: grid.len(),
            normalization_residual: self.nu_hat[0].re - 2.0,
            hermitian_residual: self.nu_hat[0].im.abs(),
        }
    }

    /// Errors name the first violated invariant.
    pub fn check(&self) -> Result<()> {
        self.validate().into_result()
    }

    /// `(1 - s) self + s other`, coefficientwise.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        let k_max = self.k_max.max(other.k_max);
        let nu_hat = (0..=k_max as i64)
            .map(|k| self.mode(k) * (1.0 - s) + other.mode(k) * s)
            .collect();
        Self { k_max, nu_hat }
    }
}

/// Result of [`BoundaryDensity::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub min_value: f64,
    pub argmin: f64,
    pub grid_size: usize,
    /// `ν̂_0 - 2`.
    pub normalization_residual: f64,
    /// `|Im ν̂_0|`; the negative modes are implied by conjugation.
    pub hermitian_residual: f64,
}

impl DensityDiagnostics {
    pub fn positive(&self) -> bool {
        self.min_value > POSITIVITY_THRESHOLD
    }

    pub fn normalized(&self) -> bool {
        self.normalization_residual.abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn hermitian(&self) -> bool {
        self.hermitian_residual <= NORMALIZATION_TOLERANCE
    }

    pub fn is_valid(&self) -> bool {
        self.positive() && self.normalized() && self.hermitian()
    }

    pub fn into_result(self) -> Result<()> {
        if !self.hermitian() {
            return Err(Error::InvalidDensity(format!(
                "hermitian symmetry violated: Im nu_hat_0 = {:e}",
                self.hermitian_residual
            )));
        }
        if !self.normalized() {
            return Err(Error::InvalidDensity(format!(
                "normalization violated: nu_hat_0 - 2 = {:e} (integral must be 4*pi)",
                self.normalization_residual
            )));
        }
        if !self.positive() {
            return Err(Error::InvalidDensity(format!(
                "positivity violated: min nu = {} at theta = {:.6} on a {}-point grid",
                self.min_value, self.argmin, self.grid_size
            )));
        }
        Ok(())
    }
}

/// Herglotz function of a valid density: `p_0 = 1`, `p_k = ν̂_k`.
pub fn herglotz_from_density(density: &BoundaryDensity, order: usize) -> Result<TruncatedSeries> {
    density.check()?;
    Ok(herglotz_unchecked(density, order))
}

pub(crate) fn herglotz_unchecked(density: &BoundaryDensity, order: usize) -> TruncatedSeries {
    let mut c = vec![Complex64::zero(); order + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let n = order.min(density.k_max);
    c[1..=n].copy_from_slice(&density.nu_hat[1..=n]);
    TruncatedSeries::from_coeffs(order, &c)
}

/// One-slit kernel `(e^{iu} + ζ)/(e^{iu} - ζ)`: `p_0 = 1`, `p_k = 2e^{-iku}`.
pub fn slit_kernel(u: f64, order: usize) -> TruncatedSeries {
    let mut c = vec![Complex64::zero(); order + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        *ck = Complex64::from_polar(2.0, -(k as f64) * u);
    }
    TruncatedSeries::from_coeffs(order, &c)
}

/// Hele-Shaw density `ν = 2/(σ |f'(e^{iθ})|²)` renormalized by
/// `σ = (1/2π) ∫ dθ/|f'|²` so that `∫ν = 4π`.
///
/// Sampled on `4·max(K, N)` points; `t` only labels the degeneracy error.
pub fn laplacian_density(f: &UnivalentCoefficients, k_max: usize, t: f64) -> Result<BoundaryDensity> {
    let m = 4 * k_max.max(f.order()).max(4);
    let angles = uniform_angles(m);
    let mut inv_sq = Vec::with_capacity(m);
    let mut min_abs = f64::INFINITY;
    for &theta in &angles {
        let d = f.derivative_at(Complex64::from_polar(1.0, theta)).norm();
        min_abs = min_abs.min(d);
        inv_sq.push(1.0 / (d * d));
    }
    if !(min_abs > DEGENERACY_THRESHOLD) {
        return Err(Error::BoundaryDegeneracy { t, min_abs_derivative: min_abs });
    }
    let sigma = inv_sq.iter().sum::<f64>() / m as f64;
    let mut nu_hat = vec![Complex64::zero(); k_max + 1];
    for (k, c) in nu_hat.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::zero();
        for (g, &theta) in inv_sq.iter().zip(&angles) {
            acc += Complex64::from_polar(2.0 * g / sigma, -(k as f64) * theta);
        }
        *c = acc / m as f64;
    }
    nu_hat[0] = Complex64::new(2.0, 0.0);
    Ok(BoundaryDensity { k_max, nu_hat })
}

/// A density in force from time `t` on (linearly blended between keyframes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub density: BoundaryDensity,
}

/// Choice of evolution driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DrivingSpec {
    /// `p ≡ 1`.
    ConstantUnit,
    /// Smooth density, constant (one keyframe) or interpolated in time.
    SmoothDensity { keyframes: Vec<Keyframe> },
    /// Slit kernel with piecewise-linear driving function given by `(t, u)` knots.
    SlitKernel { u: Vec<(f64, f64)> },
    /// Hele-Shaw growth; the density is recomputed from the current map.
    LaplacianGrowth,
}

impl DrivingSpec {
    pub fn constant_density(density: BoundaryDensity) -> Self {
        DrivingSpec::SmoothDensity { keyframes: vec![Keyframe { t: 0.0, density }] }
    }

    pub fn constant_slit(u: f64) -> Self {
        DrivingSpec::SlitKernel { u: vec![(0.0, u)] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DrivingSpec::ConstantUnit | DrivingSpec::LaplacianGrowth => Ok(()),
            DrivingSpec::SmoothDensity { keyframes } => {
                if keyframes.is_empty() {
                    return Err(Error::InvalidDriver("smooth density needs at least one keyframe".into()));
                }
                for w in keyframes.windows(2) {
                    if !(w[1].t > w[0].t) {
                        return Err(Error::InvalidDriver(format!(
                            "keyframe times must increase strictly ({} then {})",
                            w[0].t, w[1].t
                        )));
                    }
                }
                for k in keyframes {
                    k.density.check()?;
                }
                Ok(())
            }
            DrivingSpec::SlitKernel { u } => {
                if u.is_empty() {
                    return Err(Error::InvalidDriver("slit kernel needs at least one knot".into()));
                }
                if u.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidDriver("slit driving function must be finite".into()));
                }
                for w in u.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidDriver("slit knot times must increase strictly".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// True when `p` does not depend on `t` or on the current map.
    pub fn is_time_constant(&self) -> bool {
        match self {
            DrivingSpec::ConstantUnit => true,
            DrivingSpec::SmoothDensity { keyframes } => keyframes.len() == 1,
            DrivingSpec::SlitKernel { u } => {
                u.len() == 1 || u.windows(2).all(|w| w[0].1 == w[1].1)
            }
            DrivingSpec::LaplacianGrowth => false,
        }
    }

    /// Boundary density at time `t` for smooth drivers (`ν ≡ 2` for the
    /// constant driver); `None` for slit kernels and Laplacian growth.
    pub fn density_at(&self, t: f64) -> Option<BoundaryDensity> {
        match self {
            DrivingSpec::ConstantUnit => Some(BoundaryDensity::uniform()),
            DrivingSpec::SmoothDensity { keyframes } => Some(interpolate_keyframes(keyframes, t)),
            _ => None,
        }
    }

    /// Slit driving function `u(t)` (clamped outside the knot range).
    pub fn slit_u(&self, t: f64) -> Option<f64> {
        match self {
            DrivingSpec::SlitKernel { u } => Some(piecewise_linear(u, t)),
            _ => None,
        }
    }

    /// Density seen by the chain at `(t, f)`: the smooth density, the
    /// uniform one, or the renormalized Hele-Shaw density.
    pub fn density_for(&self, t: f64, f: &UnivalentCoefficients) -> Result<Option<BoundaryDensity>> {
        match self {
            DrivingSpec::LaplacianGrowth => laplacian_density(f, f.order(), t).map(Some),
            _ => Ok(self.density_at(t)),
        }
    }

    /// `p(·, t)` as a series of order `N = f.order()`.
    pub fn p_series(&self, t: f64, f: &UnivalentCoefficients) -> Result<TruncatedSeries> {
        let order = f.order();
        Ok(match self {
            DrivingSpec::ConstantUnit => TruncatedSeries::one(order),
            DrivingSpec::SmoothDensity { keyframes } => {
                herglotz_unchecked(&interpolate_keyframes(keyframes, t), order)
            }
            DrivingSpec::SlitKernel { u } => slit_kernel(piecewise_linear(u, t), order),
            DrivingSpec::LaplacianGrowth => herglotz_unchecked(&laplacian_density(f, order, t)?, order),
        })
    }

    /// Pointwise `p(w, t)`. Laplacian growth needs the current map.
    pub fn p_at(&self, t: f64, w: Complex64, f: Option<&UnivalentCoefficients>) -> Result<Complex64> {
        Ok(match self {
            DrivingSpec::ConstantUnit => Complex64::new(1.0, 0.0),
            DrivingSpec::SmoothDensity { keyframes } => {
                let d = interpolate_keyframes(keyframes, t);
                let mut acc = Complex64::zero();
                for c in d.nu_hat.iter().skip(1).rev() {
                    acc = acc * w + c;
                }
                Complex64::new(1.0, 0.0) + acc * w
            }
            DrivingSpec::SlitKernel { u } => {
                let e = Complex64::from_polar(1.0, piecewise_linear(u, t));
                (e + w) / (e - w)
            }
            DrivingSpec::LaplacianGrowth => {
                let f = f.ok_or_else(|| {
                    Error::InvalidDriver("Laplacian growth needs the current map".into())
                })?;
                self.p_series(t, f)?.evaluate(w)
            }
        })
    }
}

fn interpolate_keyframes(keyframes: &[Keyframe], t: f64) -> BoundaryDensity {
    let first = &keyframes[0];
    if keyframes.len() == 1 || t <= first.t {
        return first.density.clone();
    }
    for w in keyframes.windows(2) {
        if t <= w[1].t {
            let s = (t - w[0].t) / (w[1].t - w[0].t);
            return w[0].density.lerp(&w[1].density, s);
        }
    }
    keyframes[keyframes.len() - 1].density.clone()
}

fn piecewise_linear(knots: &[(f64, f64)], t: f64) -> f64 {
    if knots.len() == 1 || t <= knots[0].0 {
        return knots[0].1;
    }
    for w in knots.windows(2) {
        if t <= w[1].0 {
            let s = (t - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + s * (w[1].1 - w[0].1);
        }
    }
    knots[knots.len() - 1].1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::periodic_trapezoid;
    use std::f64::consts::PI;

    /// Independent quadrature oracle for `(1/2π) ∫ ν e^{-ikθ} dθ`.
    fn fourier_oracle(nu: impl Fn(f64) -> f64, k: i32, m: usize) -> Complex64 {
        let angles = uniform_angles(m);
        let re: Vec<f64> = angles.iter().map(|&t| nu(t) * (k as f64 * t).cos()).collect();
        let im: Vec<f64> = angles.iter().map(|&t| -nu(t) * (k as f64 * t).sin()).collect();
        Complex64::new(periodic_trapezoid(&re), periodic_trapezoid(&im)) / (2.0 * PI)
    }

    #[test]
    fn herglotz_examples() {
        let p = herglotz_from_density(&BoundaryDensity::uniform(), 6).unwrap();
        assert_eq!(p, TruncatedSeries::one(6));

        let d = BoundaryDensity::from_trig(&[(1, 1.0, 0.0)]);
        let p = herglotz_from_density(&d, 6).unwrap();
        let p1 = fourier_oracle(|t| 2.0 + t.cos(), 1, 64);
        assert!((p1 - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((p.coeff(1) - p1).norm() < 1e-14);
        assert!((2..=6).all(|k| p.coeff(k).is_zero()));

        let d = BoundaryDensity::from_trig(&[(2, 1.0, 0.0)]);
        let p = herglotz_from_density(&d, 6).unwrap();
        let p2 = fourier_oracle(|t| 2.0 + (2.0 * t).cos(), 2, 64);
        assert!((p.coeff(2) - p2).norm() < 1e-14);
        assert!(p.coeff(1).is_zero() && p.coeff(3).is_zero());
    }

    #[test]
    fn herglotz_boundary_real_part_is_half_density() {
        let d = BoundaryDensity::from_trig(&[(1, 0.5, 0.3), (3, -0.2, 0.4)]);
        let p = herglotz_from_density(&d, 8).unwrap();
        for theta in uniform_angles(32) {
            let re = p.evaluate(Complex64::from_polar(1.0, theta)).re;
            assert!((re - d.value(theta) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn herglotz_rejects_invalid_density() {
        let bad = BoundaryDensity::from_trig(&[(1, 3.0, 0.0)]);
        assert!(matches!(herglotz_from_density(&bad, 4), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn slit_kernel_examples() {
        let p = slit_kernel(0.0, 5);
        assert_eq!(p.coeff(0), Complex64::new(1.0, 0.0));
        for k in 1..=5 {
            assert!((p.coeff(k) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        }
        let p = slit_kernel(PI, 3);
        assert!((p.coeff(1) - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
        for u in [0.3, -1.7, 10.0] {
            let p = slit_kernel(u, 6);
            assert_eq!(p.coeff(0), Complex64::new(1.0, 0.0));
            assert!((1..=6).all(|k| (p.coeff(k).norm() - 2.0).abs() < 1e-14));
            // matches the closed-form kernel inside the disk
            let z = Complex64::new(0.2, -0.1);
            let e = Complex64::from_polar(1.0, u);
            let exact = (e + z) / (e - z);
            assert!((slit_kernel(u, 40).evaluate(z) - exact).norm() < 1e-14);
        }
    }

    #[test]
    fn laplacian_density_examples() {
        let f = UnivalentCoefficients::scaled_identity(8, 0.7);
        let d = laplacian_density(&f, 8, 0.7).unwrap();
        assert_eq!(d.mode(0), Complex64::new(2.0, 0.0));
        assert!((1..=8).all(|k| d.mode(k).norm() < 1e-14));

        let f = UnivalentCoefficients::from_tail(8, &[Complex64::new(0.1, 0.0)]);
        // modes decay like 0.2^k, so K = 20 resolves the density to round-off
        let d = laplacian_density(&f, 20, 0.0).unwrap();
        assert_eq!(d.mode(0), Complex64::new(2.0, 0.0));
        let g = |t: f64| 1.0 / (Complex64::new(1.0, 0.0) + Complex64::from_polar(0.2, t)).norm_sqr();
        let sigma = fourier_oracle(g, 0, 512).re;
        for theta in uniform_angles(24) {
            assert!((d.value(theta) - 2.0 * g(theta) / sigma).abs() < 1e-10);
        }
        assert!(d.check().is_ok());

        // f' vanishes at ζ = -1 for ζ + ζ²/2
        let f = UnivalentCoefficients::from_tail(4, &[Complex64::new(0.5, 0.0)]);
        assert!(matches!(laplacian_density(&f, 4, 0.3), Err(Error::BoundaryDegeneracy { .. })));
    }

    #[test]
    fn validate_examples() {
        let diag = BoundaryDensity::uniform().validate();
        assert_eq!(diag.min_value, 2.0);
        assert_eq!(diag.normalization_residual, 0.0);
        assert_eq!(diag.hermitian_residual, 0.0);
        assert!(diag.is_valid());

        let diag = BoundaryDensity::from_trig(&[(1, 3.0, 0.0)]).validate();
        assert!((diag.min_value + 1.0).abs() < 1e-14);
        assert!(!diag.positive());
        let err = diag.into_result().unwrap_err().to_string();
        assert!(err.contains("positivity"), "{err}");

        let d = BoundaryDensity::new(vec![Complex64::new(1.9, 0.0)]).unwrap();
        let diag = d.validate();
        assert!((diag.normalization_residual + 0.1).abs() < 1e-15);
        assert!(d.check().unwrap_err().to_string().contains("normalization"));
    }

    #[test]
    fn density_json_layout() {
        let d = BoundaryDensity::from_trig(&[(1, 1.0, 0.0)]);
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["K"], 1);
        assert_eq!(v["nu_hat"][0][0], 2.0);
        assert_eq!(v["nu_hat"][1][0], 0.5);
        let back: BoundaryDensity = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn driver_validation() {
        let d = BoundaryDensity::uniform();
        let bad = DrivingSpec::SmoothDensity {
            keyframes: vec![Keyframe { t: 1.0, density: d.clone() }, Keyframe { t: 1.0, density: d }],
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidDriver(_))));
        let slit = DrivingSpec::SlitKernel { u: vec![(0.0, f64::NAN)] };
        assert!(slit.validate().is_err());
        assert!(DrivingSpec::constant_slit(0.0).validate().is_ok());
    }

    #[test]
    fn keyframes_interpolate_linearly() {
        let a = BoundaryDensity::uniform();
        let b = BoundaryDensity::from_trig(&[(1, 1.0, 0.0)]);
        let spec = DrivingSpec::SmoothDensity {
            keyframes: vec![Keyframe { t: 0.0, density: a }, Keyframe { t: 1.0, density: b }],
        };
        spec.validate().unwrap();
        let mid = spec.density_at(0.5).unwrap();
        assert!((mid.mode(1) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((spec.density_at(3.0).unwrap().mode(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }
}
