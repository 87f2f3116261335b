//! Loewner-Kufarev evolution.
//!
//! The partial differential equation `∂_t f = ζ f' p` is integrated on the
//! coefficient vector, where it becomes the lower-triangular system
//! `ȧ_n = Σ_{m=1..n} m a_m p_{n-m}`: the first `N` coefficients evolve
//! exactly at truncation order `N`. The characteristic equation
//! `dw/dt = -w p(w, t)` is integrated pointwise and its limit
//! `e^t w(z, t)` recovers the map generated by the driver.
//!
//! Both use classical fixed-step fourth-order Runge-Kutta.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingSpec;
use crate::error::{Error, Result};
use crate::series::{uniform_angles, TruncatedSeries, UnivalentCoefficients, DEFAULT_ORDER};

pub const DEFAULT_DT: f64 = 1e-3;
/// Slit trajectories stop when `|1 - e^{-iu} w|` drops below this.
pub const SLIT_SINGULARITY_DISTANCE: f64 = 1e-9;

/// Time `t` and the map `f(·, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub t: f64,
    pub f: UnivalentCoefficients,
}

/// JSON-lines layout of a [`ChainState`]: `{"t": .., "a": [[re, im], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainRecord {
    pub t: f64,
    pub a: Vec<Complex64>,
}

impl ChainState {
    pub fn new(t: f64, f: UnivalentCoefficients) -> Self {
        Self { t, f }
    }

    /// `f(ζ, 0) = ζ` at order `N`.
    pub fn identity(order: usize) -> Self {
        Self { t: 0.0, f: UnivalentCoefficients::identity(order) }
    }

    pub fn order(&self) -> usize {
        self.f.order()
    }

    pub fn to_record(&self) -> ChainRecord {
        ChainRecord { t: self.t, a: self.f.coefficients().to_vec() }
    }

    pub fn from_record(record: ChainRecord) -> Result<Self> {
        Ok(Self { t: record.t, f: UnivalentCoefficients::new(record.a)? })
    }
}

/// Fixed-step integration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionControls {
    /// Maximum step; each output interval is split into equal steps no larger than this.
    pub dt: f64,
    /// Extra output times strictly inside `(t_start, t_end)`; `t_end` is always emitted.
    #[serde(default)]
    pub output_times: Vec<f64>,
    /// Trajectory sampling stride in steps.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    1
}

impl Default for EvolutionControls {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, output_times: Vec::new(), record_every: 1 }
    }
}

impl EvolutionControls {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// One classical RK4 step for `y' = rhs(t, y)`.
pub fn rk4_step<F>(t: f64, y: &[Complex64], h: f64, rhs: &mut F) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>>,
{
    let axpy = |a: &[Complex64], s: f64, k: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(k).map(|(x, d)| x + d * s).collect()
    };
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = rhs(t + h, &axpy(y, h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, x)| x + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect())
}

fn step_plan(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64)> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((0, 0.0));
    }
    let n = (span.abs() / dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    if t0 + h == t0 {
        return Err(Error::StepUnderflow { t: t0 });
    }
    Ok((n, h))
}

/// `ȧ_n = Σ_{m=1..n} m a_m p_{n-m}`, the coefficient form of `ζ f' p`.
pub fn coefficient_rhs(state: &ChainState, p: &TruncatedSeries) -> Result<Vec<Complex64>> {
    coefficient_rhs_raw(state.f.coefficients(), p)
}

fn coefficient_rhs_raw(a: &[Complex64], p: &TruncatedSeries) -> Result<Vec<Complex64>> {
    let n = a.len();
    if p.order() != n {
        return Err(Error::OrderMismatch { left: n, right: p.order() });
    }
    if (p.coeff(0) - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::InvalidDriver(format!("p(0) must be 1, got {}", p.coeff(0))));
    }
    let pc: Vec<Complex64> = (0..n as i32).map(|k| p.coeff(k)).collect();
    let mut out = vec![Complex64::zero(); n];
    for (idx, slot) in out.iter_mut().enumerate() {
        let order = idx + 1;
        let mut acc = Complex64::zero();
        for m in 1..=order {
            acc += a[m - 1] * pc[order - m] * m as f64;
        }
        *slot = acc;
    }
    Ok(out)
}

fn coefficients_unchecked(a: &[Complex64]) -> UnivalentCoefficients {
    UnivalentCoefficients::new_unchecked(a.to_vec())
}

fn chain_rhs(driver: &DrivingSpec) -> impl FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>> + '_ {
    move |t, y| {
        let f = coefficients_unchecked(y);
        let p = driver.p_series(t, &f)?;
        coefficient_rhs_raw(y, &p)
    }
}

fn check_step_density(driver: &DrivingSpec, t: f64) -> Result<()> {
    if let DrivingSpec::SmoothDensity { keyframes } = driver {
        if keyframes.len() > 1 {
            if let Some(d) = driver.density_at(t) {
                d.check().map_err(|e| Error::InvalidDensity(format!("at t = {t}: {e}")))?;
            }
        }
    }
    Ok(())
}

/// Integrates the coefficient system from `state` to time `t_target`
/// (forward or backward) in equal steps of at most `dt`.
pub fn evolve_between(state: &ChainState, driver: &DrivingSpec, t_target: f64, dt: f64) -> Result<ChainState> {
    let (n, h) = step_plan(state.t, t_target, dt)?;
    let mut rhs = chain_rhs(driver);
    let mut y = state.f.coefficients().to_vec();
    let mut t = state.t;
    for i in 0..n {
        y = rk4_step(t, &y, h, &mut rhs)?;
        t = if i + 1 == n { t_target } else { state.t + (i + 1) as f64 * h };
        check_step_density(driver, t)?;
    }
    if let DrivingSpec::LaplacianGrowth = driver {
        // surface a degenerate terminal state as an error rather than a NaN later
        crate::driving::laplacian_density(&coefficients_unchecked(&y), 1, t)?;
    }
    Ok(ChainState { t, f: coefficients_unchecked(&y) })
}

/// Forward problem: evolves `f0` from `t = 0` to `t_end`, returning the
/// initial state followed by one state per output time.
pub fn evolve_chain(
    f0: &UnivalentCoefficients,
    driver: &DrivingSpec,
    t_end: f64,
    controls: &EvolutionControls,
) -> Result<Vec<ChainState>> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    controls.check()?;
    driver.validate()?;
    let mut stops: Vec<f64> = controls
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();
    stops.push(t_end);

    let mut states = vec![ChainState::new(0.0, f0.clone())];
    for t in stops {
        let last = states.last().expect("initial state present");
        let next = evolve_between(last, driver, t, controls.dt)?;
        states.push(next);
    }
    Ok(states)
}

/// A characteristic `w(z0, t)` sampled in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z0: Complex64,
    pub samples: Vec<(f64, Complex64)>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Complex64) {
        *self.samples.last().expect("trajectory has the initial sample")
    }
}

/// Characteristic equation `dw/dt = -w p(w, t)`, `w(0) = z0`.
///
/// Laplacian growth couples `p` to the chain; it is integrated together
/// with `f(·, t)` started from the identity map at the default order.
pub fn solve_lkord(
    z0: Complex64,
    driver: &DrivingSpec,
    t_end: f64,
    controls: &EvolutionControls,
) -> Result<Trajectory> {
    let f0 = UnivalentCoefficients::identity(DEFAULT_ORDER);
    solve_lkord_coupled(z0, driver, &f0, t_end, controls)
}

/// As [`solve_lkord`], with an explicit initial map for Laplacian growth.
pub fn solve_lkord_coupled(
    z0: Complex64,
    driver: &DrivingSpec,
    f0: &UnivalentCoefficients,
    t_end: f64,
    controls: &EvolutionControls,
) -> Result<Trajectory> {
    if z0.norm() >= 1.0 {
        return Err(Error::InvalidArgument(format!("seed must lie in the open unit disk, got |z0| = {}", z0.norm())));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    controls.check()?;
    driver.validate()?;
    let mut samples = vec![(0.0, z0)];
    integrate_characteristic(z0, driver, f0, t_end, controls.dt, |i, t, w| {
        if (i + 1) % controls.record_every.max(1) == 0 {
            samples.push((t, w));
        }
    })?;
    if samples.last().map(|s| s.0) != Some(t_end) {
        let (n, _) = step_plan(0.0, t_end, controls.dt)?;
        if n > 0 {
            // the final step is always kept
            let w = integrate_characteristic(z0, driver, f0, t_end, controls.dt, |_, _, _| {})?;
            samples.push((t_end, w));
        }
    }
    Ok(Trajectory { z0, samples })
}

fn integrate_characteristic(
    z0: Complex64,
    driver: &DrivingSpec,
    f0: &UnivalentCoefficients,
    t_end: f64,
    dt: f64,
    mut on_step: impl FnMut(usize, f64, Complex64),
) -> Result<Complex64> {
    let (n, h) = step_plan(0.0, t_end, dt)?;
    let coupled = matches!(driver, DrivingSpec::LaplacianGrowth);
    let mut y = vec![z0];
    if coupled {
        y.extend_from_slice(f0.coefficients());
    }
    let mut rhs = |t: f64, y: &[Complex64]| -> Result<Vec<Complex64>> {
        let w = y[0];
        if coupled {
            let f = coefficients_unchecked(&y[1..]);
            let p = driver.p_series(t, &f)?;
            let mut out = vec![-w * p.evaluate(w)];
            out.extend(coefficient_rhs_raw(&y[1..], &p)?);
            Ok(out)
        } else {
            Ok(vec![-w * driver.p_at(t, w, None)?])
        }
    };
    let mut t = 0.0;
    for i in 0..n {
        if let Some(u) = driver.slit_u(t) {
            if (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -u) * y[0]).norm() < SLIT_SINGULARITY_DISTANCE {
                return Err(Error::SlitSingularity { t });
            }
        }
        y = rk4_step(t, &y, h, &mut rhs)?;
        t = if i + 1 == n { t_end } else { (i + 1) as f64 * h };
        let w = y[0];
        if !(w.norm() < 1.0) {
            return Err(Error::TrajectoryEscaped { t, modulus: w.norm() });
        }
        on_step(i, t, w);
    }
    Ok(y[0])
}

/// Values of `f(z) = lim e^t w(z, t)` with horizon-doubling error estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRecovery {
    pub horizon: f64,
    /// `e^{2T} w(z, 2T)` at each grid point.
    pub values: Vec<Complex64>,
    /// `|e^{2T} w(z, 2T) - e^T w(z, T)|`.
    pub error_estimates: Vec<f64>,
    pub tolerance: f64,
    /// Horizons `T` and `2T` agree within `10 × tolerance` everywhere.
    pub converged: bool,
}

impl LimitRecovery {
    pub fn max_error(&self) -> f64 {
        self.error_estimates.iter().copied().fold(0.0, f64::max)
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "horizons {} and {} disagree by {:e}",
                self.horizon,
                2.0 * self.horizon,
                self.max_error()
            )))
        }
    }
}

/// Recovers `f = lim_{t→∞} e^t w(·, t)` on `z_grid` from the horizons `T`
/// and `2T`. Only for drivers that do not depend on the chain.
pub fn recover_f_limit(
    driver: &DrivingSpec,
    z_grid: &[Complex64],
    horizon: f64,
    controls: &EvolutionControls,
    tolerance: f64,
) -> Result<LimitRecovery> {
    if matches!(driver, DrivingSpec::LaplacianGrowth) {
        return Err(Error::InvalidDriver("limit recovery needs a driver independent of the chain".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    controls.check()?;
    driver.validate()?;
    let f0 = UnivalentCoefficients::identity(1);
    let mut values = Vec::with_capacity(z_grid.len());
    let mut errors = Vec::with_capacity(z_grid.len());
    let (n_half, _) = step_plan(0.0, horizon, controls.dt)?;
    for &z in z_grid {
        if z.is_zero() {
            values.push(Complex64::zero());
            errors.push(0.0);
            continue;
        }
        let mut at_horizon = Complex64::zero();
        let w_end = integrate_characteristic(z, driver, &f0, 2.0 * horizon, controls.dt, |i, t, w| {
            if i + 1 == n_half {
                at_horizon = w * t.exp();
            }
        })?;
        let value = w_end * (2.0 * horizon).exp();
        errors.push((value - at_horizon).norm());
        values.push(value);
    }
    let converged = errors.iter().all(|&e| e <= 10.0 * tolerance);
    Ok(LimitRecovery { horizon, values, error_estimates: errors, tolerance, converged })
}

/// Taylor coefficients of the limit map from Cauchy sums on `|z| = radius`.
pub fn recover_limit_coefficients(
    driver: &DrivingSpec,
    order: usize,
    horizon: f64,
    radius: f64,
    controls: &EvolutionControls,
    tolerance: f64,
) -> Result<(UnivalentCoefficients, LimitRecovery)> {
    let m = (4 * order).max(32);
    let grid: Vec<Complex64> = uniform_angles(m).iter().map(|&t| Complex64::from_polar(radius, t)).collect();
    let rec = recover_f_limit(driver, &grid, horizon, controls, tolerance)?;
    let s = TruncatedSeries::fourier_project(&rec.values, order, 0);
    let a = (1..=order as i32)
        .map(|k| s.coeff(k) / radius.powi(k))
        .collect::<Vec<_>>();
    let mut a = a;
    a[0] = Complex64::new(a[0].re, 0.0);
    Ok((UnivalentCoefficients::new(a)?, rec))
}

/// `max |∂_t f' - ∂_ζ(ζ f' p)|` over exact coefficients, with `∂_t f`
/// taken from [`coefficient_rhs`]. Vanishes identically.
pub fn hamiltonian_residual(state: &ChainState, p: &TruncatedSeries) -> Result<f64> {
    let velocity = coefficient_rhs(state, p)?;
    hamiltonian_residual_observed(state, &velocity, p)
}

/// Same residual against an externally observed velocity `ȧ` (for
/// instance a finite difference of an evolved chain).
pub fn hamiltonian_residual_observed(state: &ChainState, velocity: &[Complex64], p: &TruncatedSeries) -> Result<f64> {
    let n = state.order();
    if velocity.len() != n {
        return Err(Error::OrderMismatch { left: n, right: velocity.len() });
    }
    if p.order() != n {
        return Err(Error::OrderMismatch { left: n, right: p.order() });
    }
    let lhs = UnivalentCoefficients::new_unchecked(velocity.to_vec()).to_series().differentiate();
    let f_prime = state.f.to_series().differentiate().rebased(0)?;
    let hamiltonian = TruncatedSeries::identity(n).mul(&f_prime)?.mul(p)?;
    let rhs = hamiltonian.differentiate();
    let diff = lhs.sub(&rhs)?;
    let keep = diff.exact_through().min(n as i32 - 1);
    Ok((0..=keep).map(|k| diff.coeff(k).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::BoundaryDensity;
    use std::f64::consts::E;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn coefficient_rhs_examples() {
        let f = UnivalentCoefficients::new(vec![c(1.0), c(0.3), Complex64::new(0.1, 0.2)]).unwrap();
        let state = ChainState::new(0.0, f);
        let v = coefficient_rhs(&state, &TruncatedSeries::one(3)).unwrap();
        let expected = [c(1.0), c(0.6), Complex64::new(0.3, 0.6)];
        assert!(v.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-15));

        let p = TruncatedSeries::from_real(4, &[1.0, 0.5]);
        let v = coefficient_rhs(&ChainState::identity(4), &p).unwrap();
        assert_eq!(v[0], c(1.0));
        assert_eq!(v[1], c(0.5));

        let bad = TruncatedSeries::from_real(4, &[2.0]);
        assert!(coefficient_rhs(&ChainState::identity(4), &bad).is_err());
        assert!(matches!(
            coefficient_rhs(&ChainState::identity(4), &TruncatedSeries::one(5)),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn constant_unit_gives_scaled_identity() {
        let states = evolve_chain(&UnivalentCoefficients::identity(8), &DrivingSpec::ConstantUnit, 1.0, &EvolutionControls::default()).unwrap();
        let last = states.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert!((last.f.a1() - E).abs() < 1e-12);
        assert!((2..=8).all(|k| last.f.a(k).is_zero()));
    }

    #[test]
    fn output_times_are_hit_exactly() {
        let controls = EvolutionControls { output_times: vec![0.25, 0.5, 0.75], ..Default::default() };
        let states = evolve_chain(&UnivalentCoefficients::identity(4), &DrivingSpec::ConstantUnit, 1.0, &controls).unwrap();
        let times: Vec<f64> = states.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for s in &states {
            assert!((s.f.a1() - s.t.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_density_second_coefficient_grows_like_half_t() {
        let driver = DrivingSpec::constant_density(BoundaryDensity::from_trig(&[(1, 1.0, 0.0)]));
        let t = 1e-3;
        let states = evolve_chain(&UnivalentCoefficients::identity(6), &driver, t, &EvolutionControls::with_dt(1e-4)).unwrap();
        let a2 = states.last().unwrap().f.a(2);
        // a_2 = (e^{2t} - e^t)/2 exactly for this driver
        assert!((a2.re - 0.5 * t).abs() < 2.0 * t * t);
        assert!((a2.re - 0.5 * ((2.0 * t).exp() - t.exp())).abs() < 1e-14);
    }

    #[test]
    fn lower_triangular_truncation_is_exact() {
        let driver = DrivingSpec::constant_density(BoundaryDensity::from_trig(&[(1, 0.6, 0.2), (2, 0.3, 0.0)]));
        let ctl = EvolutionControls::default();
        let lo = evolve_chain(&UnivalentCoefficients::identity(8), &driver, 0.5, &ctl).unwrap();
        let hi = evolve_chain(&UnivalentCoefficients::identity(16), &driver, 0.5, &ctl).unwrap();
        for k in 1..=8 {
            assert_eq!(lo[1].f.a(k), hi[1].f.a(k), "k = {k}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let f0 = UnivalentCoefficients::identity(4);
        let ctl = EvolutionControls::default();
        assert!(evolve_chain(&f0, &DrivingSpec::ConstantUnit, 0.0, &ctl).is_err());
        assert!(evolve_chain(&f0, &DrivingSpec::ConstantUnit, 1.0, &EvolutionControls::with_dt(-1.0)).is_err());
        let bad = DrivingSpec::constant_density(BoundaryDensity::from_trig(&[(1, 3.0, 0.0)]));
        assert!(matches!(evolve_chain(&f0, &bad, 1.0, &ctl), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn constant_unit_characteristic_is_exponential_decay() {
        let z0 = Complex64::new(0.3, -0.4);
        let tr = solve_lkord(z0, &DrivingSpec::ConstantUnit, 2.0, &EvolutionControls::default()).unwrap();
        for &(t, w) in &tr.samples {
            assert!((w - z0 * (-t).exp()).norm() < 1e-13);
        }
        let mods: Vec<f64> = tr.samples.iter().map(|s| s.1.norm()).collect();
        assert!(mods.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(tr.last().0, 2.0);
    }

    #[test]
    fn slit_first_integral_is_conserved() {
        let driver = DrivingSpec::constant_slit(0.0);
        for z0 in [Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.35), Complex64::new(0.0, -0.5)] {
            let tr = solve_lkord(z0, &driver, 3.0, &EvolutionControls::default()).unwrap();
            let q0 = z0 / (Complex64::new(1.0, 0.0) + z0).powi(2);
            for &(t, w) in &tr.samples {
                let q = w * t.exp() / (Complex64::new(1.0, 0.0) + w).powi(2);
                assert!((q - q0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn seed_outside_disk_is_rejected() {
        let r = solve_lkord(Complex64::new(1.0, 0.0), &DrivingSpec::ConstantUnit, 1.0, &EvolutionControls::default());
        assert!(r.is_err());
    }

    #[test]
    fn slit_singularity_stops_cleanly() {
        let z0 = Complex64::new(1.0 - 1e-10, 0.0);
        let r = solve_lkord(z0, &DrivingSpec::constant_slit(0.0), 1.0, &EvolutionControls::default());
        assert!(matches!(r, Err(Error::SlitSingularity { .. })));
    }

    #[test]
    fn recover_limit_constant_unit_is_identity() {
        let grid = [Complex64::new(0.2, 0.1), Complex64::new(-0.6, 0.3)];
        let rec = recover_f_limit(&DrivingSpec::ConstantUnit, &grid, 5.0, &EvolutionControls::default(), 1e-10).unwrap();
        assert!(rec.converged);
        for (v, z) in rec.values.iter().zip(&grid) {
            assert!((v - z).norm() < 1e-10);
        }
    }

    #[test]
    fn recover_limit_reports_non_convergence() {
        let grid = [Complex64::new(0.5, 0.0)];
        let rec = recover_f_limit(&DrivingSpec::constant_slit(0.0), &grid, 0.5, &EvolutionControls::default(), 1e-10).unwrap();
        assert!(!rec.converged);
        assert!(rec.require_converged().is_err());
    }

    #[test]
    fn hamiltonian_residual_vanishes_and_detects_mismatch() {
        let driver = DrivingSpec::constant_density(BoundaryDensity::from_trig(&[(1, 1.0, 0.0)]));
        let states = evolve_chain(&UnivalentCoefficients::identity(10), &driver, 0.3, &EvolutionControls::default()).unwrap();
        let state = &states[1];
        let p = driver.p_series(state.t, &state.f).unwrap();
        assert!(hamiltonian_residual(state, &p).unwrap() < 1e-13);

        let circle = ChainState::new(0.4, UnivalentCoefficients::scaled_identity(6, 0.4));
        assert_eq!(hamiltonian_residual(&circle, &TruncatedSeries::one(6)).unwrap(), 0.0);

        // observed velocity from the true driver, claimed p = 1
        let h = 1e-4;
        let fwd = evolve_between(state, &driver, state.t + h, h).unwrap();
        let bwd = evolve_between(state, &driver, state.t - h, h).unwrap();
        let velocity: Vec<Complex64> = fwd
            .f
            .coefficients()
            .iter()
            .zip(bwd.f.coefficients())
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        assert!(hamiltonian_residual_observed(state, &velocity, &p).unwrap() < 1e-6);
        let wrong = hamiltonian_residual_observed(state, &velocity, &TruncatedSeries::one(10)).unwrap();
        assert!(wrong > 0.1, "{wrong}");
    }
}
