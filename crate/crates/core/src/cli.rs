//! Batch front end: config ingestion, run orchestration, reports and plots.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input (config,
//! driver, missing or malformed file), 3 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{
    curvature_decomposition, dirichlet_energy, log_action_quadrature, log_action_series, theorem1_rhs,
    verify_theorem1_from, EnergyReport,
};
use crate::config::{OutputKind, RunConfig};
use crate::driving::{laplacian_density, BoundaryDensity, DrivingSpec};
use crate::error::Error;
use crate::evolution::{evolve_chain, ChainState};
use crate::io;
use crate::series::UnivalentCoefficients;
use crate::svg;
use crate::virasoro::{
    closed_form_variation, gelfand_fuks, goluzin_schiffer, kirillov_coordinate_operator, neretin_generatrix,
    neretin_recursion, neretin_recursion_exact, psi_pairing, variation_coefficients, variation_commutator,
    variation_residue, witt_bracket, CircleVectorField, ContourSettings, CoordinatePolynomial, Monomial,
    NU_BASIS_CENTRAL_CONSTANT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Boundary samples per rendered curve.
pub const CURVE_SAMPLES: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Loewner-Kufarev chains, logarithmic action and Virasoro identities")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Pass threshold for residual checks.
    #[arg(long, global = true, value_name = "REAL")]
    pub tolerance: Option<f64>,
    /// Highest mode or polynomial index.
    #[arg(long, global = true, value_name = "INT")]
    pub kmax: Option<usize>,
    /// Central charge.
    #[arg(long, global = true, value_name = "REAL", allow_hyphen_values = true)]
    pub charge: Option<f64>,
    /// Seed for randomized identity suites.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the chain and write JSON lines (plus SVG frames with `plots`).
    Evolve,
    /// Dirichlet energy and both action routes at each output time.
    Action,
    /// Finite-difference check of the action derivative over a time sweep.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1,
    /// Identity suite for brackets, cocycle, variations and Neretin polynomials.
    #[command(name = "virasoro-check")]
    VirasoroCheck,
    /// Neretin polynomials P_2..P_kmax.
    Neretin {
        /// Emit the polynomials as JSON term lists up to this index.
        #[arg(long, value_name = "KMAX")]
        table: Option<usize>,
    },
    /// Goluzin-Schiffer variations: contour against residue and closed forms.
    Variation,
    /// Render SVG figures from files written by the other commands.
    Plot {
        /// Chain JSON lines, energy CSV or profile JSON files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Check that each boundary curve lies inside every later one.
        #[arg(long)]
        check_nesting: bool,
    },
}

/// A failed run: exit code plus a single-line diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub exit_code: i32,
    pub code: String,
    pub message: String,
    pub context: Vec<(String, String)>,
}

impl Failure {
    pub fn new(exit_code: i32, code: &str, message: impl Into<String>) -> Self {
        Self { exit_code, code: code.into(), message: message.into(), context: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.context.push((key.into(), value.to_string()));
        self
    }

    /// `error code=.. message=".." key=value ...`
    pub fn diagnostic(&self) -> String {
        let msg = self.message.replace('\n', " ").replace('"', "'");
        let mut line = format!("error code={} message=\"{msg}\"", self.code);
        for (k, v) in &self.context {
            let v = v.replace(char::is_whitespace, "_");
            let _ = write!(line, " {k}={v}");
        }
        line
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = if e.is_validation() { EXIT_INVALID } else { EXIT_NUMERICAL };
        let t = match &e {
            Error::StepUnderflow { t }
            | Error::BoundaryDegeneracy { t, .. }
            | Error::TrajectoryEscaped { t, .. }
            | Error::SlitSingularity { t } => Some(*t),
            _ => None,
        };
        let f = Failure::new(exit, e.code(), e.to_string());
        match t {
            Some(t) => f.with("t", t),
            None => f,
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` and runs; returns the process exit code. Output goes to
/// stdout, the diagnostic of a failure to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", Failure::new(EXIT_INVALID, "usage", first).diagnostic());
            return EXIT_INVALID;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{}", f.diagnostic());
            f.exit_code
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Evolve => cmd_evolve(&load_config(cli)?),
        Command::Action => cmd_action(&load_config(cli)?),
        Command::VerifyTheorem1 => cmd_verify_theorem1(&load_config(cli)?),
        Command::VirasoroCheck => cmd_virasoro_check(cli),
        Command::Neretin { table } => cmd_neretin(cli, *table),
        Command::Variation => cmd_variation(cli),
        Command::Plot { inputs, check_nesting } => cmd_plot(cli, inputs, *check_nesting),
    }
}

/// Config from `--config` (defaults otherwise) with flag overrides applied.
pub fn load_config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::from(e).with("path", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = cli.tolerance {
        cfg.tolerance = t;
    }
    if let Some(k) = cli.kmax {
        cfg.kmax = k;
    }
    if let Some(c) = cli.charge {
        cfg.charge = c;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn density_for(driver: &DrivingSpec, state: &ChainState) -> crate::Result<Option<BoundaryDensity>> {
    match driver {
        DrivingSpec::LaplacianGrowth => Ok(Some(laplacian_density(&state.f, state.order(), state.t)?)),
        _ => Ok(driver.density_at(state.t)),
    }
}

/// Angular profiles of `ν` and `κ v_n` along a chain.
pub fn chain_profiles(driver: &DrivingSpec, states: &[ChainState]) -> crate::Result<Vec<svg::Profile>> {
    let mut out = Vec::new();
    for s in states {
        let Some(density) = density_for(driver, s)? else { continue };
        let curv = curvature_decomposition(s, &density)?;
        out.push(svg::Profile {
            t: s.t,
            nu: density.values(&curv.angles),
            angles: curv.angles,
            kappa_v_n: curv.kappa_v_n,
        });
    }
    Ok(out)
}

pub fn cmd_evolve(cfg: &RunConfig) -> CmdResult {
    let f0 = cfg.initial_map()?;
    let states = evolve_chain(&f0, &cfg.driver, cfg.t_end, &cfg.evolution_controls())?;
    let chain_path = cfg.out_dir.join("chain.jsonl");
    io::write_chain_jsonl(&chain_path, &states)?;
    if cfg.wants(OutputKind::Plots) {
        for (i, frame) in svg::boundary_frames_svg(&states, CURVE_SAMPLES).iter().enumerate() {
            io::write_text(&cfg.out_dir.join(format!("frame_{i:03}.svg")), frame)?;
        }
        io::write_text(&cfg.out_dir.join("boundary.svg"), &svg::boundary_curves_svg(&states, CURVE_SAMPLES))?;
        let profiles = chain_profiles(&cfg.driver, &states)?;
        if !profiles.is_empty() {
            io::write_json(&cfg.out_dir.join("profiles.json"), &profiles)?;
        }
    }
    let last = states.last().expect("chain has the initial state");
    println!(
        "evolve records={} t={} a1={} max_tail={:e} out={}",
        states.len(),
        last.t,
        last.f.a1(),
        (2..=last.order()).map(|k| last.f.a(k).norm()).fold(0.0, f64::max),
        chain_path.display()
    );
    Ok(())
}

/// One row of the `action` report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionRow {
    pub t: f64,
    pub dirichlet: f64,
    pub log_action_series: f64,
    pub series_tail: f64,
    pub log_action_quadrature: f64,
    pub quadrature_error: f64,
    pub theorem1_term1: Option<f64>,
    pub theorem1_term2: Option<f64>,
    pub theorem1_rhs: Option<f64>,
}

pub fn cmd_action(cfg: &RunConfig) -> CmdResult {
    let f0 = cfg.initial_map()?;
    let states = evolve_chain(&f0, &cfg.driver, cfg.t_end, &cfg.evolution_controls())?;
    let grid = cfg.verify_controls().quadrature;
    let mut rows = Vec::new();
    for s in &states {
        let series = log_action_series(s)?;
        let quad = log_action_quadrature(s, &grid).map_err(|e| Failure::from(e).with("t", s.t))?;
        let terms = match density_for(&cfg.driver, s)? {
            Some(d) => Some(theorem1_rhs(s, &d)?),
            None => None,
        };
        let row = ActionRow {
            t: s.t,
            dirichlet: dirichlet_energy(s),
            log_action_series: series.value,
            series_tail: series.tail,
            log_action_quadrature: quad.value,
            quadrature_error: quad.error_estimate,
            theorem1_term1: terms.map(|x| x.term1),
            theorem1_term2: terms.map(|x| x.term2),
            theorem1_rhs: terms.map(|x| x.rhs),
        };
        println!(
            "action t={} dirichlet={} S_series={} S_quadrature={} gap={:e}",
            row.t,
            row.dirichlet,
            row.log_action_series,
            row.log_action_quadrature,
            (row.log_action_series - row.log_action_quadrature).abs()
        );
        rows.push(row);
    }
    io::write_json(&cfg.out_dir.join("action.json"), &rows)?;
    Ok(())
}

pub fn cmd_verify_theorem1(cfg: &RunConfig) -> CmdResult {
    let f0 = cfg.initial_map()?;
    let controls = cfg.verify_controls();
    let times = cfg.output_times();
    // sweep points are independent
    let results: Vec<crate::Result<EnergyReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = times
            .iter()
            .map(|&t| {
                let (f0, controls, driver) = (&f0, &controls, &cfg.driver);
                scope.spawn(move || verify_theorem1_from(f0, driver, t, controls))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut reports = Vec::with_capacity(results.len());
    for (t, r) in times.iter().zip(results) {
        reports.push(r.map_err(|e| {
            let f = Failure::from(e);
            if f.context.iter().any(|(k, _)| k == "t") {
                f
            } else {
                f.with("t", t)
            }
        })?);
    }
    io::write_json(&cfg.out_dir.join("theorem1.json"), &reports)?;
    io::write_energy_csv(&cfg.out_dir.join("energy.csv"), &reports)?;
    for r in &reports {
        println!(
            "theorem1 t={} rhs={} fd_dSdt={} residual={:e} richardson_slope={:.3}",
            r.t,
            r.theorem1_rhs,
            r.fd_dsdt,
            r.residual(),
            r.diagnostic("richardson_slope").unwrap_or(f64::NAN)
        );
    }
    let worst = reports
        .iter()
        .map(|r| (r.t, r.residual()))
        .fold((f64::NAN, 0.0_f64), |acc, x| if !(x.1 <= acc.1) { x } else { acc });
    if !(worst.1 < cfg.tolerance) {
        return Err(Failure::new(EXIT_CHECK_FAILED, "residual_exceeded", "finite-difference residual above tolerance")
            .with("t", worst.0)
            .with("residual", format!("{:e}", worst.1))
            .with("tolerance", cfg.tolerance));
    }
    println!("theorem1 max_residual={:e} tolerance={} PASS", worst.1, cfg.tolerance);
    Ok(())
}

/// One identity of the Virasoro suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

fn random_field(rng: &mut ChaCha8Rng, k: usize) -> CircleVectorField {
    let modes = (0..2 * k + 1)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    CircleVectorField::from_modes(modes).expect("odd mode count")
}

fn random_map(rng: &mut ChaCha8Rng, order: usize, scale: f64) -> UnivalentCoefficients {
    let tail: Vec<Complex64> = (2..=order)
        .map(|k| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale / k as f64)
        .collect();
    UnivalentCoefficients::from_tail(order, &tail)
}

fn field_gap(a: &CircleVectorField, b: &CircleVectorField) -> f64 {
    let k = a.k_max().max(b.k_max()) as i64;
    (-k..=k).map(|m| (a.mode(m) - b.mode(m)).norm()).fold(0.0, f64::max)
}

/// Fixed test map `ζ + ...` with small coefficients, zero-padded to `order ≥ 5`.
pub fn reference_map(order: usize) -> UnivalentCoefficients {
    let mut a = vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.2, 0.05),
        Complex64::new(-0.05, 0.02),
        Complex64::new(0.01, -0.02),
        Complex64::new(0.004, 0.0),
    ];
    a.resize(order.max(5), Complex64::new(0.0, 0.0));
    UnivalentCoefficients::new(a).expect("a_1 = 1")
}

/// 20 interior sample points.
pub fn reference_points() -> Vec<Complex64> {
    (0..20).map(|j| Complex64::from_polar(0.1 + 0.03 * j as f64, 0.7 * j as f64)).collect()
}

/// Points used against the residue route, whose `f^{1-j}` terms cancel
/// like `|f|^{1-|k|}` and lose digits near the origin.
pub fn residue_points(points: &[Complex64]) -> Vec<Complex64> {
    points.iter().copied().filter(|z| z.norm() >= 0.35).collect()
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Field `ν` of a real boundary density, modes `-K..=K`.
pub fn density_field(d: &BoundaryDensity) -> CircleVectorField {
    let k = d.k_max() as i64;
    CircleVectorField::from_modes((-k..=k).map(|m| d.mode(m)).collect()).expect("odd mode count")
}

/// Runs every identity; randomized ones draw from `seed`.
pub fn virasoro_identity_suite(kmax: usize, charge: f64, seed: u64) -> crate::Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let f = reference_map(kmax + 2);
    let zs = reference_points();
    let contour = ContourSettings::default();

    let mut closed = 0.0_f64;
    for k in -2..=3 {
        let v = goluzin_schiffer(&f, &CircleVectorField::nu(k), &zs, &contour)?;
        let exact: Vec<Complex64> = zs.iter().map(|&z| closed_form_variation(k, &f, z).expect("k >= -2")).collect();
        closed = closed.max(max_gap(&v, &exact));
    }
    out.push(IdentityCheck::new("closed_forms_vs_contour", closed, 1e-8));

    let mut residue = 0.0_f64;
    let outer = residue_points(&zs);
    for k in -(kmax as i64)..=kmax as i64 {
        let nu = CircleVectorField::nu(k);
        residue = residue.max(max_gap(&goluzin_schiffer(&f, &nu, &outer, &contour)?, &variation_residue(&f, &nu, &outer)?));
    }
    out.push(IdentityCheck::new("residue_vs_contour", residue, 1e-8));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut anti, mut jacobi, mut cocycle, mut cocycle_anti) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let (a, b, c) = (random_field(&mut rng, 3), random_field(&mut rng, 3), random_field(&mut rng, 3));
        anti = anti.max(field_gap(&witt_bracket(&a, &b), &witt_bracket(&b, &a).scale(Complex64::new(-1.0, 0.0))));
        let jac = witt_bracket(&a, &witt_bracket(&b, &c))
            .add(&witt_bracket(&b, &witt_bracket(&c, &a)))
            .add(&witt_bracket(&c, &witt_bracket(&a, &b)));
        jacobi = jacobi.max(jac.max_abs());
        let cyc = gelfand_fuks(&witt_bracket(&a, &b), &c)
            + gelfand_fuks(&witt_bracket(&b, &c), &a)
            + gelfand_fuks(&witt_bracket(&c, &a), &b);
        cocycle = cocycle.max(cyc.norm());
        cocycle_anti = cocycle_anti.max((gelfand_fuks(&a, &b) + gelfand_fuks(&b, &a)).norm());
    }
    out.push(IdentityCheck::new("witt_antisymmetry", anti, 1e-10));
    out.push(IdentityCheck::new("witt_jacobi", jacobi, 1e-10));
    out.push(IdentityCheck::new("cocycle_identity", cocycle, 1e-10));
    out.push(IdentityCheck::new("cocycle_antisymmetry", cocycle_anti, 1e-10));

    let mut kernel = 0.0_f64;
    for m in -1i64..=1 {
        for n in -3i64..=3 {
            kernel = kernel.max(gelfand_fuks(&CircleVectorField::nu(m), &CircleVectorField::nu(n)).norm());
        }
    }
    out.push(IdentityCheck::new("cocycle_kernel", kernel, 0.0));

    let mut central = 0.0_f64;
    for m in 2..=kmax.max(2) as i64 {
        let mf = m as f64;
        let expected = NU_BASIS_CENTRAL_CONSTANT * (mf * (mf * mf - 1.0));
        central = central.max((gelfand_fuks(&CircleVectorField::nu(m), &CircleVectorField::nu(-m)) - expected).norm());
    }
    out.push(IdentityCheck::new("cocycle_mode_normalization", central, 1e-12));

    // [L_m, L_n] = (m - n) L_{m+n} on the exact polynomial ring
    let exact = neretin_recursion_exact(kmax.max(3))?;
    let mut kirillov_ok = true;
    for m in 0..=3usize {
        for n in 0..=3usize {
            for p in exact.iter().skip(2) {
                let lhs = kirillov_coordinate_operator(m, &kirillov_coordinate_operator(n, p))
                    .sub(&kirillov_coordinate_operator(n, &kirillov_coordinate_operator(m, p)));
                let factor = BigRational::from_integer(BigInt::from(m as i64 - n as i64));
                let rhs = kirillov_coordinate_operator(m + n, p).scale(&factor);
                kirillov_ok &= lhs == rhs;
            }
        }
    }
    out.push(IdentityCheck::new("kirillov_commutators", if kirillov_ok { 0.0 } else { 1.0 }, 0.0));

    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let two = BigRational::from_integer(BigInt::from(2));
    let p2 = CoordinatePolynomial::from_terms(&[(&[(3, 1)], half.clone()), (&[(2, 2)], -half)]);
    let p3 = CoordinatePolynomial::from_terms(&[
        (&[(4, 1)], two.clone()),
        (&[(2, 1), (3, 1)], -two.clone() * two.clone()),
        (&[(2, 3)], two),
    ]);
    let anchors_ok = exact[2] == p2 && exact[3] == p3;
    out.push(IdentityCheck::new("neretin_anchors_exact", if anchors_ok { 0.0 } else { 1.0 }, 0.0));

    let polys = neretin_recursion(kmax, charge)?;
    let mut dual = 0.0_f64;
    for _ in 0..100 {
        let g = random_map(&mut rng, (kmax + 4).max(8), 0.5);
        let series = neretin_generatrix(&g, charge)?;
        for (k, pk) in polys.iter().enumerate() {
            dual = dual.max((pk.evaluate(|j| g.c(j)) - series.coeff(k as i32)).norm());
        }
    }
    out.push(IdentityCheck::new("neretin_dual_route", dual, 1e-10 * charge.abs().max(1.0)));

    let a: Vec<Complex64> = f.to_series().retruncate(16).coeffs()[1..].to_vec();
    let mut closure = 0.0_f64;
    for (m, n) in [(1, -1), (2, -1), (1, 2), (-2, 1), (0, -2)] {
        let (n1, n2) = (CircleVectorField::nu(m), CircleVectorField::nu(n));
        let comm = variation_commutator(&a, &n1, &n2, 1e-5)?;
        let bracket = variation_coefficients(&a, &witt_bracket(&n1, &n2))?;
        // coefficients beyond N - 6 feel the truncation
        for i in 0..10 {
            closure = closure.max((comm[i] + bracket[i]).norm());
        }
    }
    out.push(IdentityCheck::new("variation_bracket_closure", closure, 1e-7));

    let density = BoundaryDensity::from_trig(&[(1, 1.0, 0.0), (2, 0.2, -0.3)]);
    let mut psi = 0.0_f64;
    for _ in 0..10 {
        let g = random_map(&mut rng, 12, 0.3);
        let state = ChainState::new(0.0, g.clone());
        let term2 = theorem1_rhs(&state, &density)?.term2;
        psi = psi.max((psi_pairing(&g, &density_field(&density))?.re - term2).abs());
    }
    out.push(IdentityCheck::new("psi_vs_term2", psi, 1e-10));
    Ok(out)
}

fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn format_monomial(m: &Monomial) -> String {
    m.iter()
        .map(|(j, e)| if *e == 1 { format!("c_{j}") } else { format!("c_{j}^{e}") })
        .collect::<Vec<_>>()
        .join(" ")
}

fn format_real(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// `P_k = λ(c_{k+1} ± ...)`, with `λ` the coefficient of the linear term at
/// central charge `charge`, e.g. `6(c_3 - c_2^2)` for `k = 2`, `c = 12`.
pub fn format_neretin(k: usize, q: &CoordinatePolynomial<BigRational>, charge: f64) -> String {
    if q.is_empty() {
        return format!("P_{k} = 0");
    }
    let mut terms: Vec<(&Monomial, &BigRational)> = q.terms().iter().collect();
    terms.sort_by(|a, b| {
        let len = |m: &Monomial| m.values().sum::<u32>();
        len(a.0).cmp(&len(b.0)).then_with(|| b.0.cmp(a.0))
    });
    let lead = terms[0].1.clone();
    let mut body = String::new();
    for (i, (m, c)) in terms.iter().enumerate() {
        let r = (*c).clone() / lead.clone();
        let sign = if r.is_negative() { "-" } else { "+" };
        let abs = r.abs();
        let coef = if abs.is_one() { String::new() } else { format!("{} ", format_rational(&abs)) };
        if i == 0 {
            let s = if r.is_negative() { "-" } else { "" };
            let _ = write!(body, "{s}{coef}{}", format_monomial(m));
        } else {
            let _ = write!(body, " {sign} {coef}{}", format_monomial(m));
        }
    }
    let lead_f = charge * lead.to_f64().unwrap_or(f64::NAN);
    if lead_f == 1.0 {
        format!("P_{k} = {body}")
    } else {
        format!("P_{k} = {}({body})", format_real(lead_f))
    }
}

pub fn cmd_virasoro_check(cli: &Cli) -> CmdResult {
    let base = optional_config(cli)?;
    let kmax = cli.kmax.or(base.as_ref().map(|c| c.kmax)).unwrap_or(8);
    let charge = cli.charge.or(base.as_ref().map(|c| c.charge)).unwrap_or(crate::virasoro::DEFAULT_CHARGE);
    let seed = cli.seed.or(base.as_ref().map(|c| c.seed)).unwrap_or(0);
    if kmax < 3 {
        return Err(Failure::new(EXIT_INVALID, "invalid_argument", "kmax must be at least 3").with("kmax", kmax));
    }
    let mut checks = virasoro_identity_suite(kmax, charge, seed)?;
    if let Some(tol) = cli.tolerance {
        for c in checks.iter_mut().filter(|c| c.tolerance > 0.0) {
            c.tolerance = tol;
            c.passed = c.value <= tol;
        }
    }
    for c in &checks {
        println!(
            "{} {} value={:e} tolerance={:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    let exact = neretin_recursion_exact(kmax)?;
    for (k, q) in exact.iter().enumerate().skip(2) {
        println!("{}", format_neretin(k, q, charge));
    }
    if let Some(dir) = out_dir(cli, base.as_ref()) {
        io::write_json(&dir.join("virasoro_check.json"), &checks)?;
    }
    if let Some(c) = checks.iter().find(|c| !c.passed) {
        return Err(Failure::new(EXIT_CHECK_FAILED, "identity_failed", format!("identity {} failed", c.name))
            .with("identity", &c.name)
            .with("value", format!("{:e}", c.value))
            .with("tolerance", format!("{:e}", c.tolerance)));
    }
    Ok(())
}

fn optional_config(cli: &Cli) -> std::result::Result<Option<RunConfig>, Failure> {
    match &cli.config {
        Some(_) => load_config(cli).map(Some),
        None => Ok(None),
    }
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>) -> Option<PathBuf> {
    cli.out.clone().or(cfg.map(|c| c.out_dir.clone()))
}

/// One `P_k` of the Neretin table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeretinEntry {
    pub k: usize,
    pub polynomial: Vec<crate::virasoro::TermRecord>,
}

pub fn neretin_table(kmax: usize, charge: f64) -> crate::Result<Vec<NeretinEntry>> {
    Ok(neretin_recursion(kmax, charge)?
        .iter()
        .enumerate()
        .skip(2)
        .map(|(k, p)| NeretinEntry { k, polynomial: p.to_records() })
        .collect())
}

pub fn cmd_neretin(cli: &Cli, table: Option<usize>) -> CmdResult {
    let base = optional_config(cli)?;
    let kmax = table.or(cli.kmax).or(base.as_ref().map(|c| c.kmax)).unwrap_or(8);
    let charge = cli.charge.or(base.as_ref().map(|c| c.charge)).unwrap_or(crate::virasoro::DEFAULT_CHARGE);
    if kmax < 2 {
        return Err(Failure::new(EXIT_INVALID, "invalid_argument", "kmax must be at least 2").with("kmax", kmax));
    }
    if table.is_some() {
        let entries = neretin_table(kmax, charge)?;
        println!("{}", serde_json::to_string(&entries).map_err(Error::from)?);
        if let Some(dir) = out_dir(cli, base.as_ref()) {
            io::write_json(&dir.join("neretin.json"), &entries)?;
        }
    } else {
        for (k, q) in neretin_recursion_exact(kmax)?.iter().enumerate().skip(2) {
            println!("{}", format_neretin(k, q, charge));
        }
    }
    Ok(())
}

/// Per-mode comparison of the variation routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationRow {
    pub k: i64,
    pub contour_vs_residue: f64,
    pub contour_vs_closed_form: Option<f64>,
}

pub fn cmd_variation(cli: &Cli) -> CmdResult {
    let base = optional_config(cli)?;
    let kmax = cli.kmax.or(base.as_ref().map(|c| c.kmax)).unwrap_or(8);
    let tolerance = cli.tolerance.unwrap_or(1e-8);
    let (f, contour) = match &base {
        Some(c) if c.f0.is_some() && c.order > kmax => (c.initial_map()?.normalized(), c.contour()),
        Some(c) if c.f0.is_some() => {
            return Err(Failure::new(EXIT_INVALID, "invalid_argument", "N must exceed kmax for the residue route")
                .with("N", c.order)
                .with("kmax", kmax))
        }
        Some(c) => (reference_map(kmax + 2), c.contour()),
        None => (reference_map(kmax + 2), ContourSettings::default()),
    };
    let limit = contour.max_sample_radius();
    let zs: Vec<Complex64> = reference_points().into_iter().map(|z| z * (limit / 0.67).min(1.0)).collect();
    let mut rows = Vec::new();
    for k in -(kmax as i64)..=kmax as i64 {
        let nu = CircleVectorField::nu(k);
        let contour_vals = goluzin_schiffer(&f, &nu, &zs, &contour)?;
        let outer = residue_points(&zs);
        let residue = variation_residue(&f, &nu, &outer)?;
        let contour_outer = goluzin_schiffer(&f, &nu, &outer, &contour)?;
        let closed = if k >= -2 {
            let exact: Vec<Complex64> = zs.iter().map(|&z| closed_form_variation(k, &f, z).expect("k >= -2")).collect();
            Some(max_gap(&contour_vals, &exact))
        } else {
            None
        };
        let row = VariationRow { k, contour_vs_residue: max_gap(&contour_outer, &residue), contour_vs_closed_form: closed };
        println!(
            "variation k={} contour_vs_residue={:e} contour_vs_closed_form={}",
            k,
            row.contour_vs_residue,
            row.contour_vs_closed_form.map(|v| format!("{v:e}")).unwrap_or_else(|| "none".into())
        );
        rows.push(row);
    }
    if let Some(dir) = out_dir(cli, base.as_ref()) {
        io::write_json(&dir.join("variation.json"), &rows)?;
    }
    let worst = rows
        .iter()
        .map(|r| (r.k, r.contour_vs_residue.max(r.contour_vs_closed_form.unwrap_or(0.0))))
        .fold((0, 0.0_f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    if !(worst.1 <= tolerance) {
        return Err(Failure::new(EXIT_CHECK_FAILED, "variation_mismatch", "variation routes disagree")
            .with("k", worst.0)
            .with("gap", format!("{:e}", worst.1))
            .with("tolerance", tolerance));
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into())
}

pub fn cmd_plot(cli: &Cli, inputs: &[PathBuf], check_nesting: bool) -> CmdResult {
    let base = optional_config(cli)?;
    let dir = out_dir(cli, base.as_ref()).unwrap_or_else(|| PathBuf::from("out"));
    for input in inputs {
        if !input.is_file() {
            return Err(Failure::new(EXIT_INVALID, "missing_file", "input file not found").with("path", input.display()));
        }
    }
    let mut summary: BTreeMap<String, String> = BTreeMap::new();
    for input in inputs {
        let name = stem(input);
        let ctx = |e: Error| Failure::from(e).with("path", input.display());
        let ext = input.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "jsonl" => {
                let states = io::read_chain_jsonl(input).map_err(ctx)?;
                let target = dir.join(format!("{name}_boundary.svg"));
                io::write_text(&target, &svg::boundary_curves_svg(&states, CURVE_SAMPLES))?;
                summary.insert(input.display().to_string(), target.display().to_string());
                if check_nesting {
                    let report = svg::check_nesting(&states, CURVE_SAMPLES);
                    println!("nesting pairs={} violations={}", report.pairs_checked, report.violations.len());
                    if let Some(&(s, t, n)) = report.violations.first() {
                        return Err(Failure::new(EXIT_CHECK_FAILED, "not_nested", "boundary curve leaves a later curve")
                            .with("t_inner", s)
                            .with("t_outer", t)
                            .with("points_outside", n));
                    }
                }
            }
            "csv" => {
                let rows = io::read_energy_csv(input).map_err(ctx)?;
                let target = dir.join(format!("{name}_energy.svg"));
                io::write_text(&target, &svg::energy_trace_svg(&rows))?;
                summary.insert(input.display().to_string(), target.display().to_string());
            }
            "json" => {
                let profiles: Vec<svg::Profile> = io::read_json(input).map_err(ctx)?;
                let nu = dir.join(format!("{name}_nu.svg"));
                let kv = dir.join(format!("{name}_kappa_vn.svg"));
                io::write_text(&nu, &svg::nu_profiles_svg(&profiles))?;
                io::write_text(&kv, &svg::kappa_vn_profiles_svg(&profiles))?;
                summary.insert(input.display().to_string(), format!("{} {}", nu.display(), kv.display()));
            }
            _ => {
                return Err(Failure::new(EXIT_INVALID, "malformed_input", "unsupported input type (expected .jsonl, .csv or .json)")
                    .with("path", input.display()))
            }
        }
    }
    for (input, out) in &summary {
        println!("plot {input} -> {out}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neretin_formatting() {
        let exact = neretin_recursion_exact(3).unwrap();
        assert_eq!(format_neretin(2, &exact[2], 12.0), "P_2 = 6(c_3 - c_2^2)");
        assert_eq!(format_neretin(3, &exact[3], 1.0), "P_3 = 2(c_4 - 2 c_2 c_3 + c_2^3)");
        assert_eq!(format_neretin(2, &exact[2], 2.0), "P_2 = c_3 - c_2^2");
    }

    #[test]
    fn diagnostic_is_one_line() {
        let f = Failure::from(Error::SlitSingularity { t: 0.5 }).with("path", "a b");
        let d = f.diagnostic();
        assert_eq!(d, "error code=slit_singularity message=\"trajectory reached the slit-kernel singularity at t = 0.5\" t=0.5 path=a_b");
        assert_eq!(f.exit_code, EXIT_NUMERICAL);
        assert_eq!(Failure::from(Error::Config("x".into())).exit_code, EXIT_INVALID);
    }

    #[test]
    fn identity_suite_passes() {
        let checks = virasoro_identity_suite(6, 12.0, 3).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn suite_is_deterministic_per_seed() {
        let a = virasoro_identity_suite(4, 1.0, 1).unwrap();
        let b = virasoro_identity_suite(4, 1.0, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            if ["closed_forms_vs_contour", "residue_vs_contour", "cocycle_kernel", "neretin_anchors_exact"].contains(&x.name.as_str()) {
                assert_eq!(x.value.to_bits(), y.value.to_bits());
            }
        }
    }
}
