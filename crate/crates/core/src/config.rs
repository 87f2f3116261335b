//! Run configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::action::{QuadratureGrid, VerifyControls, DEFAULT_FD_STEP};
use crate::driving::DrivingSpec;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionControls, DEFAULT_DT};
use crate::series::{UnivalentCoefficients, DEFAULT_ORDER};
use crate::virasoro::{ContourSettings, DEFAULT_CHARGE};

pub const MIN_ORDER: usize = 8;
pub const MAX_ORDER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Chain,
    Energy,
    Theorem1,
    Virasoro,
    Neretin,
    Plots,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}
fn default_t_end() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}
fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Chain]
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_tolerance() -> f64 {
    1e-4
}
fn default_contour_radius() -> f64 {
    0.9
}
fn default_contour_nodes() -> usize {
    1024
}
fn default_kmax() -> usize {
    8
}
fn default_charge() -> f64 {
    DEFAULT_CHARGE
}
fn default_driver() -> DrivingSpec {
    DrivingSpec::ConstantUnit
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_driver")]
    pub driver: DrivingSpec,
    /// Truncation order.
    #[serde(rename = "N", default = "default_order")]
    pub order: usize,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Output (and sweep) times in `(0, t_end]`; `t_end` when empty.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Initial coefficients `a_1, a_2, ...`, zero-padded to `N`; identity when absent.
    #[serde(default)]
    pub f0: Option<Vec<Complex64>>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Pass threshold for residual checks.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_contour_radius")]
    pub contour_radius: f64,
    #[serde(default = "default_contour_nodes")]
    pub contour_nodes: usize,
    /// Angular grid size for boundary quadrature; `0` means `4N`.
    #[serde(default)]
    pub grid_m: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_charge")]
    pub charge: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&self.order) {
            return Err(Error::Config(format!("N must lie in [{MIN_ORDER}, {MAX_ORDER}], got {}", self.order)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 10.0 * self.dt) {
            return Err(Error::Config(format!(
                "fd_step must lie in (0, 10 dt] = (0, {}], got {}",
                10.0 * self.dt,
                self.fd_step
            )));
        }
        if let Some(t) = self.times.iter().find(|&&t| !(t > 0.0 && t <= self.t_end)) {
            return Err(Error::Config(format!("output time {t} outside (0, t_end]")));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.contour_radius > 0.0 && self.contour_radius < 1.0) {
            return Err(Error::Config(format!("contour_radius must lie in (0, 1), got {}", self.contour_radius)));
        }
        if self.grid_m != 0 && self.grid_m < 4 * self.order {
            return Err(Error::Config(format!("grid_m must be at least 4N = {}, got {}", 4 * self.order, self.grid_m)));
        }
        if let Some(a) = &self.f0 {
            if a.len() > self.order {
                return Err(Error::Config(format!("f0 has {} coefficients but N = {}", a.len(), self.order)));
            }
        }
        self.initial_map()?;
        self.driver.validate()
    }

    pub fn initial_map(&self) -> Result<UnivalentCoefficients> {
        match &self.f0 {
            None => Ok(UnivalentCoefficients::identity(self.order)),
            Some(a) => {
                let mut v = a.clone();
                v.resize(self.order, Complex64::new(0.0, 0.0));
                UnivalentCoefficients::new(v).map_err(|e| Error::Config(format!("f0: {e}")))
            }
        }
    }

    /// Sorted output times, `[t_end]` by default.
    pub fn output_times(&self) -> Vec<f64> {
        let mut t = if self.times.is_empty() { vec![self.t_end] } else { self.times.clone() };
        t.sort_by(|a, b| a.total_cmp(b));
        t.dedup();
        t
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    pub fn evolution_controls(&self) -> EvolutionControls {
        EvolutionControls { dt: self.dt, output_times: self.output_times(), record_every: 1 }
    }

    pub fn verify_controls(&self) -> VerifyControls {
        VerifyControls {
            order: self.order,
            dt: self.dt,
            fd_step: self.fd_step,
            quadrature: QuadratureGrid { angular_nodes: self.grid_m, ..QuadratureGrid::default() },
        }
    }

    pub fn contour(&self) -> ContourSettings {
        ContourSettings { radius: self.contour_radius, nodes: self.contour_nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::BoundaryDensity;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.order, 16);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.fd_step, 1e-4);
        assert_eq!(c.contour_radius, 0.9);
        assert_eq!(c.output_times(), vec![1.0]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn parses_driver_and_fields() {
        let cfg = RunConfig::from_json(
            r#"{"driver": {"kind": "smooth_density", "keyframes": [{"t": 0.0, "density": {"K": 1, "nu_hat": [[2.0, 0.0], [0.5, 0.0]]}}]},
                "N": 12, "times": [0.5, 0.25], "outputs": ["chain", "energy"], "f0": [[1.0, 0.0], [0.1, 0.0]]}"#,
        )
        .unwrap();
        assert_eq!(cfg.order, 12);
        assert_eq!(cfg.output_times(), vec![0.25, 0.5]);
        assert!(cfg.wants(OutputKind::Energy));
        assert_eq!(cfg.initial_map().unwrap().a(2), Complex64::new(0.1, 0.0));
        assert_eq!(cfg.driver, DrivingSpec::constant_density(BoundaryDensity::from_trig(&[(1, 1.0, 0.0)])));
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            r#"{"N": 4}"#,
            r#"{"N": 65}"#,
            r#"{"dt": 0}"#,
            r#"{"t_end": -1}"#,
            r#"{"fd_step": 0.5}"#,
            r#"{"times": [2.0]}"#,
            r#"{"bogus": 1}"#,
            r#"{"f0": [[-1.0, 0.0]]}"#,
            r#"{"driver": {"kind": "smooth_density", "keyframes": [{"t": 0.0, "density": {"K": 0, "nu_hat": [[1.0, 0.0]]}}]}}"#,
        ] {
            let err = RunConfig::from_json(bad).unwrap_err();
            assert!(err.is_validation(), "{bad}: {err}");
        }
    }
}
