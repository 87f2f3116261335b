//! Dirichlet energy, logarithmic action and the variation formula.
//!
//! The logarithmic action is evaluated from the coefficients of the
//! pre-Schwarzian `h = f''/f'`,
//!
//! `S[f] = π Σ_{n≥0} |h_n|²/(n+1) + 2π log a_1`,
//!
//! and cross-checked by polar quadrature of the two-dimensional integrand.
//! The time derivative of `S` along a chain is compared against
//!
//! `∫[Re(1 + e^{iθ}h)]² ν dθ + ∫Re(e^{2iθ} S_f) ν dθ - 2π`
//!
//! by central finite differences with one Richardson halving.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driving::{laplacian_density, BoundaryDensity, DrivingSpec, DEGENERACY_THRESHOLD};
use crate::error::{Error, Result};
use crate::evolution::{evolve_between, ChainState, DEFAULT_DT};
use crate::quadrature::{periodic_trapezoid, GaussLegendre};
use crate::series::{uniform_angles, TruncatedSeries, UnivalentCoefficients};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOLERANCE: f64 = 1e-12;

/// `E = 2π log a_1`.
pub fn dirichlet_energy(state: &ChainState) -> f64 {
    2.0 * PI * state.f.a1().ln()
}

/// Regularized energy `E_ε = -∫ log ρ(θ) dθ + 2π log ε`, where `ρ(θ)` is
/// the radius at which `|f(ρ e^{iθ})| = ε`. Converges to
/// [`dirichlet_energy`] as `ε → 0`.
pub fn dirichlet_energy_quadrature(state: &ChainState, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let f = &state.f;
    let m = (4 * f.order()).max(64);
    let mut logs = Vec::with_capacity(m);
    for theta in uniform_angles(m) {
        let e = Complex64::from_polar(1.0, theta);
        let modulus = |r: f64| f.evaluate(e * r).norm();
        let mut hi = (4.0 * epsilon / f.a1()).min(0.99);
        while modulus(hi) < epsilon {
            hi = 0.5 * (hi + 1.0);
            if hi > 1.0 - 1e-12 {
                return Err(Error::NonConvergence("level set |f| = ε not reached inside the disk".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if modulus(mid) < epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 * hi {
                break;
            }
        }
        logs.push(-(0.5 * (lo + hi)).ln());
    }
    Ok(periodic_trapezoid(&logs) + 2.0 * PI * epsilon.ln())
}

/// `h = f''/f'` of the polynomial `f` as a power series through `ζ^N`.
pub fn pre_schwarzian_coefficients(f: &UnivalentCoefficients) -> Result<TruncatedSeries> {
    let n = f.order();
    let d1: Vec<Complex64> = (1..=n).map(|k| f.a(k) * k as f64).collect();
    let d2: Vec<Complex64> = (2..=n).map(|k| f.a(k) * (k * (k - 1)) as f64).collect();
    TruncatedSeries::from_coeffs(n, &d2).div(&TruncatedSeries::from_coeffs(n, &d1))
}

/// Series value of the logarithmic action with a truncation-tail estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesAction {
    pub value: f64,
    /// First omitted term `|h_N|²/(N+1)` (without the factor `π`).
    pub tail: f64,
}

/// `π Σ_{n<N} |h_n|²/(n+1) + 2π log a_1`.
pub fn log_action_series(state: &ChainState) -> Result<SeriesAction> {
    let n = state.order();
    if n < 4 {
        return Err(Error::InvalidArgument(format!("log action needs order at least 4, got {n}")));
    }
    let h = pre_schwarzian_coefficients(&state.f)?;
    let sum: f64 = (0..n as i32).map(|k| h.coeff(k).norm_sqr() / (k + 1) as f64).sum();
    Ok(SeriesAction {
        value: PI * sum + 2.0 * PI * state.f.a1().ln(),
        tail: h.coeff(n as i32).norm_sqr() / (n + 1) as f64,
    })
}

/// Polar product grid for the disk quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    /// Gauss-Legendre nodes in `r` (at least 64).
    pub radial_nodes: usize,
    /// Trapezoid nodes in `θ`; zero selects `max(4N, 64)`.
    pub angular_nodes: usize,
    /// Largest accepted change under doubling of both directions, relative
    /// to `max(1, |value|)`.
    pub tolerance: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self { radial_nodes: 64, angular_nodes: 0, tolerance: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureAction {
    pub value: f64,
    pub error_estimate: f64,
}

fn disk_integral(h: &[Complex64], radial: usize, angular: usize) -> f64 {
    let gl = GaussLegendre::new(radial);
    let angles = uniform_angles(angular);
    let mut total = 0.0;
    for (r, wr) in gl.composite(0.0, 1.0, 1) {
        let ring: Vec<f64> = angles
            .iter()
            .map(|&theta| {
                let zeta = Complex64::from_polar(r, theta);
                let mut hv = Complex64::new(0.0, 0.0);
                for c in h.iter().rev() {
                    hv = hv * zeta + c;
                }
                r * ((hv + zeta.inv()).norm_sqr() - 1.0 / (r * r))
            })
            .collect();
        total += wr * periodic_trapezoid(&ring);
    }
    total
}

/// `∫_U (|h + 1/ζ|² - 1/|ζ|²) dσ + 2π log a_1` with `h` the order-`N`
/// series, by Gauss-Legendre in `r` and the trapezoid rule in `θ`.
pub fn log_action_quadrature(state: &ChainState, grid: &QuadratureGrid) -> Result<QuadratureAction> {
    let n = state.order();
    if grid.radial_nodes < 64 {
        return Err(Error::InvalidArgument(format!("radial nodes must be at least 64, got {}", grid.radial_nodes)));
    }
    let angular = if grid.angular_nodes == 0 { (4 * n).max(64) } else { grid.angular_nodes };
    if angular < 4 * n {
        return Err(Error::InvalidArgument(format!("angular nodes must be at least 4N = {}, got {angular}", 4 * n)));
    }
    let hs = pre_schwarzian_coefficients(&state.f)?;
    let h: Vec<Complex64> = (0..n as i32).map(|k| hs.coeff(k)).collect();
    let coarse = disk_integral(&h, grid.radial_nodes, angular);
    let fine = disk_integral(&h, 2 * grid.radial_nodes, 2 * angular);
    let error_estimate = (fine - coarse).abs();
    if error_estimate > grid.tolerance * fine.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "disk quadrature changed by {error_estimate:e} under refinement"
        )));
    }
    Ok(QuadratureAction { value: fine + 2.0 * PI * state.f.a1().ln(), error_estimate })
}

/// Boundary values `(f', f''/f', S_f)` at `e^{iθ}`.
fn boundary_jets(f: &UnivalentCoefficients, angles: &[f64]) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    angles
        .iter()
        .map(|&theta| {
            let [d1, d2, d3] = f.derivatives_at(Complex64::from_polar(1.0, theta));
            if d1.norm() < DEGENERACY_THRESHOLD {
                return Err(Error::BoundaryDegeneracy { t: f64::NAN, min_abs_derivative: d1.norm() });
            }
            let h = d2 / d1;
            Ok((d1, h, d3 / d1 - h * h * 1.5))
        })
        .collect()
}

fn circle_grid(f: &UnivalentCoefficients, density: &BoundaryDensity) -> Vec<f64> {
    uniform_angles((4 * f.order()).max(4 * density.k_max()).max(64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Terms {
    pub term1: f64,
    pub term2: f64,
    pub rhs: f64,
}

/// The three boundary integrals of the variation formula by the trapezoid rule.
pub fn theorem1_rhs(state: &ChainState, density: &BoundaryDensity) -> Result<Theorem1Terms> {
    density.check()?;
    let angles = circle_grid(&state.f, density);
    let jets = boundary_jets(&state.f, &angles).map_err(|e| with_time(e, state.t))?;
    let nu = density.values(&angles);
    let mut t1 = Vec::with_capacity(angles.len());
    let mut t2 = Vec::with_capacity(angles.len());
    for ((&theta, &(_, h, s)), &v) in angles.iter().zip(&jets).zip(&nu) {
        let e = Complex64::from_polar(1.0, theta);
        let k = (Complex64::new(1.0, 0.0) + e * h).re;
        t1.push(k * k * v);
        t2.push((e * e * s).re * v);
    }
    let term1 = periodic_trapezoid(&t1);
    let term2 = periodic_trapezoid(&t2);
    Ok(Theorem1Terms { term1, term2, rhs: term1 + term2 - 2.0 * PI })
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::BoundaryDegeneracy { min_abs_derivative, .. } => Error::BoundaryDegeneracy { t, min_abs_derivative },
        other => other,
    }
}

/// Boundary samples of curvature and normal velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSamples {
    pub angles: Vec<f64>,
    pub kappa: Vec<f64>,
    pub v_n: Vec<f64>,
    pub kappa_v_n: Vec<f64>,
    /// `∫[Re(1 + e^{iθ}h)]² ν dθ`.
    pub term1: f64,
    /// `4 ∫ (κ v_n)²/ν dθ`.
    pub rearranged: f64,
    /// `4π ∫ (κ v_n)² |dz|`, reported only.
    pub literal: f64,
}

impl CurvatureSamples {
    pub fn identity_residual(&self) -> f64 {
        (self.term1 - self.rearranged).abs()
    }
}

/// `κ|f'| = Re(1 + e^{iθ}h)` and `v_n = |f'| ν/2` on the circle grid.
pub fn curvature_decomposition(state: &ChainState, density: &BoundaryDensity) -> Result<CurvatureSamples> {
    density.check()?;
    let angles = circle_grid(&state.f, density);
    let jets = boundary_jets(&state.f, &angles).map_err(|e| with_time(e, state.t))?;
    let nu = density.values(&angles);
    let mut out = CurvatureSamples {
        angles: angles.clone(),
        kappa: Vec::new(),
        v_n: Vec::new(),
        kappa_v_n: Vec::new(),
        term1: 0.0,
        rearranged: 0.0,
        literal: 0.0,
    };
    let mut t1 = Vec::new();
    let mut re = Vec::new();
    let mut lit = Vec::new();
    for ((&theta, &(d1, h, _)), &v) in angles.iter().zip(&jets).zip(&nu) {
        let speed = d1.norm();
        let k_speed = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, theta) * h).re;
        let kappa = k_speed / speed;
        let v_n = speed * v / 2.0;
        let kv = kappa * v_n;
        out.kappa.push(kappa);
        out.v_n.push(v_n);
        out.kappa_v_n.push(kv);
        t1.push(k_speed * k_speed * v);
        re.push(4.0 * kv * kv / v);
        lit.push(4.0 * PI * kv * kv * speed);
    }
    out.term1 = periodic_trapezoid(&t1);
    out.rearranged = periodic_trapezoid(&re);
    out.literal = periodic_trapezoid(&lit);
    Ok(out)
}

/// Action, its variation and the finite-difference check at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub dirichlet: f64,
    pub log_action_series: f64,
    pub log_action_quadrature: f64,
    pub theorem1_term1: f64,
    pub theorem1_term2: f64,
    pub theorem1_rhs: f64,
    pub fd_dsdt: f64,
    pub fd_step: f64,
    pub residuals: BTreeMap<String, f64>,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "t,dirichlet,S_series,S_quadrature,term1,term2,rhs,fd_dSdt,residual";

    /// `|fd_dSdt - rhs|`.
    pub fn residual(&self) -> f64 {
        (self.fd_dsdt - self.theorem1_rhs).abs()
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).copied()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.dirichlet,
            self.log_action_series,
            self.log_action_quadrature,
            self.theorem1_term1,
            self.theorem1_term2,
            self.theorem1_rhs,
            self.fd_dsdt,
            self.residual()
        )
    }
}

/// Finite-difference controls for [`verify_theorem1`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyControls {
    pub order: usize,
    pub dt: f64,
    pub fd_step: f64,
    pub quadrature: QuadratureGrid,
}

impl Default for VerifyControls {
    fn default() -> Self {
        Self {
            order: crate::series::DEFAULT_ORDER,
            dt: DEFAULT_DT,
            fd_step: DEFAULT_FD_STEP,
            quadrature: QuadratureGrid::default(),
        }
    }
}

fn density_of(driver: &DrivingSpec, state: &ChainState) -> Result<BoundaryDensity> {
    match driver {
        DrivingSpec::ConstantUnit => Ok(BoundaryDensity::uniform()),
        DrivingSpec::SmoothDensity { .. } if driver.is_time_constant() => {
            Ok(driver.density_at(state.t).expect("smooth driver has a density"))
        }
        DrivingSpec::LaplacianGrowth => laplacian_density(&state.f, state.order(), state.t),
        _ => Err(Error::InvalidDriver(
            "the variation check needs a time-constant density or Laplacian growth".into(),
        )),
    }
}

fn fd_derivative(state: &ChainState, driver: &DrivingSpec, h: f64) -> Result<f64> {
    let plus = evolve_between(state, driver, state.t + h, h)?;
    let minus = evolve_between(state, driver, state.t - h, h)?;
    Ok((log_action_series(&plus)?.value - log_action_series(&minus)?.value) / (2.0 * h))
}

/// Evolves `f0 = ζ` to `t` and compares `dS/dt` by central differences
/// (steps `h` and `h/2`) with the boundary integrals.
pub fn verify_theorem1(driver: &DrivingSpec, t: f64, controls: &VerifyControls) -> Result<EnergyReport> {
    let f0 = UnivalentCoefficients::identity(controls.order);
    verify_theorem1_from(&f0, driver, t, controls)
}

/// As [`verify_theorem1`] from an arbitrary initial map.
pub fn verify_theorem1_from(
    f0: &UnivalentCoefficients,
    driver: &DrivingSpec,
    t: f64,
    controls: &VerifyControls,
) -> Result<EnergyReport> {
    driver.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be non-negative, got {t}")));
    }
    let h = controls.fd_step;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let start = ChainState::new(0.0, f0.clone());
    let state = if t > 0.0 { evolve_between(&start, driver, t, controls.dt)? } else { start };
    let density = density_of(driver, &state)?;

    let terms = theorem1_rhs(&state, &density)?;
    let series = log_action_series(&state)?;
    let quad = log_action_quadrature(&state, &controls.quadrature)?;
    let fd = fd_derivative(&state, driver, h)?;
    let fd_half = fd_derivative(&state, driver, 0.5 * h)?;
    let curvature = curvature_decomposition(&state, &density)?;

    let res = (fd - terms.rhs).abs();
    let res_half = (fd_half - terms.rhs).abs();
    let extrapolated = (4.0 * fd_half - fd) / 3.0;
    let mut residuals = BTreeMap::new();
    residuals.insert("fd_residual".to_string(), res);
    residuals.insert("fd_residual_half_step".to_string(), res_half);
    residuals.insert("fd_dSdt_half_step".to_string(), fd_half);
    residuals.insert("richardson_ratio".to_string(), res / res_half);
    residuals.insert("richardson_slope".to_string(), (res / res_half).log2());
    residuals.insert("richardson_residual".to_string(), (extrapolated - terms.rhs).abs());
    residuals.insert("series_tail".to_string(), PI * series.tail);
    residuals.insert("action_route_gap".to_string(), (series.value - quad.value).abs());
    residuals.insert("quadrature_refinement".to_string(), quad.error_estimate);
    residuals.insert("curvature_identity".to_string(), curvature.identity_residual());
    residuals.insert("literal_curvature_term".to_string(), curvature.literal);
    // v_n = |f'| ν/2 here; a density normalized to unit mass would differ by 2π
    residuals.insert("velocity_convention_factor".to_string(), 2.0 * PI);
    residuals.insert("conformal_radius_error".to_string(), (state.f.a1() - f0.a1() * state.t.exp()).abs());

    Ok(EnergyReport {
        t: state.t,
        dirichlet: dirichlet_energy(&state),
        log_action_series: series.value,
        log_action_quadrature: quad.value,
        theorem1_term1: terms.term1,
        theorem1_term2: terms.term2,
        theorem1_rhs: terms.rhs,
        fd_dsdt: fd,
        fd_step: h,
        residuals,
    })
}

/// Newton inversion of `f(ζ) = z` started at `start`.
pub fn invert_map(f: &UnivalentCoefficients, z: Complex64, start: Complex64) -> Result<Complex64> {
    let mut zeta = start;
    let scale = z.norm().max(1.0);
    for _ in 0..NEWTON_MAX_ITER {
        let r = f.evaluate(zeta) - z;
        if r.norm() <= NEWTON_TOLERANCE * scale {
            // one polishing step takes the root to rounding level
            let d = f.derivative_at(zeta);
            if d.norm() >= f64::MIN_POSITIVE {
                zeta -= r / d;
            }
            return if zeta.norm() < 1.0 { Ok(zeta) } else { Err(Error::InversionFailed { re: z.re, im: z.im }) };
        }
        let d = f.derivative_at(zeta);
        if d.norm() < f64::MIN_POSITIVE {
            break;
        }
        zeta -= r / d;
        if !zeta.norm().is_finite() {
            break;
        }
    }
    Err(Error::InversionFailed { re: z.re, im: z.im })
}

fn nearest_preimage(f: &UnivalentCoefficients, z: Complex64) -> Complex64 {
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_d = z.norm();
    for i in 1..32 {
        let r = i as f64 / 32.0;
        for theta in uniform_angles(64) {
            let zeta = Complex64::from_polar(r, theta);
            let d = (f.evaluate(zeta) - z).norm();
            if d < best_d {
                best_d = d;
                best = zeta;
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub z: Complex64,
    pub zeta: Complex64,
    pub w_prime: Complex64,
    /// `|(W' f'(ζ))² - 1/ζ²|`.
    pub residual: f64,
}

/// `W'(z) = -1/(ζ f'(ζ))` at `ζ = f^{-1}(z)`.
pub fn complex_green_field(state: &ChainState, z_samples: &[Complex64]) -> Result<Vec<GreenSample>> {
    let f = &state.f;
    z_samples
        .iter()
        .map(|&z| {
            if z.norm() == 0.0 {
                return Err(Error::InvalidArgument("W' has a pole at the origin".into()));
            }
            let zeta = invert_map(f, z, nearest_preimage(f, z))?;
            let d = f.derivative_at(zeta);
            let w_prime = -(zeta * d).inv();
            let residual = ((w_prime * d).powi(2) - (zeta * zeta).inv()).norm();
            Ok(GreenSample { z, zeta, w_prime, residual })
        })
        .collect()
}

/// `φ(f(ζ)) = -log(|ζ|² |f'(ζ)|²)`.
pub fn metric_phi(f: &UnivalentCoefficients, zeta: Complex64) -> f64 {
    -(zeta.norm_sqr() * f.derivative_at(zeta).norm_sqr()).ln()
}

/// Samples of `φ` on a polar grid of the punctured disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDensity {
    pub grid: Vec<(f64, f64)>,
    pub phi: Vec<f64>,
}

pub fn metric_density(state: &ChainState, radii: &[f64], angular: usize) -> Result<MetricDensity> {
    let mut grid = Vec::new();
    let mut phi = Vec::new();
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("radius {r} outside (0, 1)")));
        }
        for theta in uniform_angles(angular) {
            grid.push((r, theta));
            phi.push(metric_phi(&state.f, Complex64::from_polar(r, theta)));
        }
    }
    Ok(MetricDensity { grid, phi })
}

/// Annulus patch and stencil spacing for the harmonicity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub radial: usize,
    pub angular: usize,
    /// Five-point stencil spacing in image coordinates.
    pub spacing: f64,
}

impl Default for HarmonicityGrid {
    fn default() -> Self {
        Self { r_min: 0.2, r_max: 0.9, radial: 8, angular: 16, spacing: 1e-2 }
    }
}

impl HarmonicityGrid {
    fn nodes(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for i in 0..self.radial {
            let r = if self.radial == 1 {
                self.r_min
            } else {
                self.r_min + (self.r_max - self.r_min) * i as f64 / (self.radial - 1) as f64
            };
            for theta in uniform_angles(self.angular) {
                out.push(Complex64::from_polar(r, theta));
            }
        }
        out
    }
}

fn discrete_laplacians(f: &UnivalentCoefficients, grid: &HarmonicityGrid, spacing: f64) -> Result<Vec<f64>> {
    let dirs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    grid.nodes()
        .into_iter()
        .map(|zeta0| {
            let z0 = f.evaluate(zeta0);
            let d0 = f.derivative_at(zeta0);
            let mut sum = -4.0 * metric_phi(f, zeta0);
            for d in dirs {
                let z = z0 + d * spacing;
                let zeta = invert_map(f, z, zeta0 + d * spacing / d0)?;
                sum += metric_phi(f, zeta);
            }
            Ok(sum / (spacing * spacing))
        })
        .collect()
}

/// `max |Δ_h φ|` over the patch nodes at the grid spacing.
pub fn harmonicity_check(state: &ChainState, grid: &HarmonicityGrid) -> Result<f64> {
    Ok(discrete_laplacians(&state.f, grid, grid.spacing)?
        .into_iter()
        .fold(0.0, |m, x| m.max(x.abs())))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    pub spacing: f64,
    pub residual: f64,
    pub residual_half: f64,
    /// `log2` of the residual ratio between spacings `h` and `h/2`.
    pub slope: f64,
    /// `max |(4 Δ_{h/2} φ - Δ_h φ)/3|`.
    pub extrapolated: f64,
}

/// Residuals at spacing `h` and `h/2`, their observed order and the
/// Richardson-extrapolated residual.
pub fn harmonicity_refinement(state: &ChainState, grid: &HarmonicityGrid) -> Result<HarmonicityReport> {
    let coarse = discrete_laplacians(&state.f, grid, grid.spacing)?;
    let fine = discrete_laplacians(&state.f, grid, 0.5 * grid.spacing)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let residual = max_abs(&coarse);
    let residual_half = max_abs(&fine);
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| ((4.0 * f - c) / 3.0).abs())
        .fold(0.0, f64::max);
    Ok(HarmonicityReport {
        spacing: grid.spacing,
        residual,
        residual_half,
        slope: (residual / residual_half).log2(),
        extrapolated,
    })
}
