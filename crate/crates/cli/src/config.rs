//! Run configuration, read from a single TOML document.
//!
//! Every table is optional except `[state]`; missing keys take the values in
//! `configs/default.toml`. Environment variables are never consulted.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use propertime::analysis::AdmissibilityThresholds;
use propertime::kinematics::{build_grid, ChartKind, GridSpec, Mass, QuadratureGrid, RadialMap};
use propertime::povm::PositionTruncation;
use propertime::states::{GaussianSpec, PhysState, StateFile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The configuration shipped with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mass scale; every axis in the outputs is in units of 1/mass.
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Worker threads for library-level data parallelism; 0 uses every core.
    /// Outputs are bit-identical for any value.
    #[serde(default)]
    pub threads: usize,
    pub state: StateSource,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub truncation: Truncations,
    /// Proper times, units 1/m.
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_time_axis")]
    pub time_axis: AxisRange,
    #[serde(default = "default_position_axis")]
    pub position_axis: AxisRange,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub overlap: OverlapConfig,
    #[serde(default)]
    pub covariance: CovarianceConfig,
    #[serde(default)]
    pub admissibility: AdmissibilityThresholds,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Exactly one source for the state under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSource {
    Gaussian(GaussianSpec),
    /// A JSON state file; relative paths resolve against the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Linear radial map; used for Q⁰ quadratic forms and norms.
    pub spherical: GridSpec,
    /// Logarithmic radial map; used for time densities.
    pub time: GridSpec,
    /// Used for position densities, Q³ and admissibility.
    pub hyperbolic: GridSpec,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            spherical: GridSpec::spherical(64, 24, 8, 8.0),
            time: GridSpec::spherical_time(320, 16, 16, -12.0, -0.005),
            hyperbolic: GridSpec::hyperbolic(48, 160, 16, 6.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncations {
    pub l_max: u32,
    pub lambda_max: f64,
    pub n_lambda: usize,
    pub m_z_window: [i32; 2],
}

impl Default for Truncations {
    fn default() -> Self {
        let p = PositionTruncation::default();
        Self { l_max: 8, lambda_max: p.lambda_max, n_lambda: p.n_lambda, m_z_window: p.m_z_window }
    }
}

impl Truncations {
    pub fn position(&self) -> PositionTruncation {
        PositionTruncation { lambda_max: self.lambda_max, n_lambda: self.n_lambda, m_z_window: self.m_z_window }
    }
}

/// Uniform samples min, min + step, … up to max (inclusive within step/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

/// Upper bound on samples per axis.
const MAX_AXIS_SAMPLES: usize = 1_000_000;

impl AxisRange {
    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::config(format!("{name}: need finite min, max and step > 0")));
        }
        if self.max <= self.min {
            return Err(CliError::config(format!("{name}: max must exceed min")));
        }
        if (self.max - self.min) / self.step > MAX_AXIS_SAMPLES as f64 {
            return Err(CliError::config(format!("{name}: more than {MAX_AXIS_SAMPLES} samples")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 0.5).floor() as usize;
        (0..=n).map(|k| self.min + self.step * k as f64).collect()
    }

    /// Parses `a:b`.
    pub fn parse_range(text: &str, step: f64) -> Result<Self, CliError> {
        let (a, b) =
            text.split_once(':').ok_or_else(|| CliError::config(format!("range '{text}' is not of the form a:b")))?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| CliError::config(format!("range bound '{s}': {e}")));
        Ok(Self { min: parse(a)?, max: parse(b)?, step })
    }
}

fn default_mass() -> f64 {
    1.0
}

fn default_taus() -> Vec<f64> {
    vec![0.0]
}

fn default_time_axis() -> AxisRange {
    AxisRange { min: -24.0, max: 24.0, step: 0.04 }
}

fn default_position_axis() -> AxisRange {
    AxisRange { min: -60.0, max: 60.0, step: 0.1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Extension parameter φ ∈ (−π, π].
    pub phi: f64,
    pub n_min: i64,
    pub n_max: i64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { phi: PI, n_min: -3, n_max: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelAxis {
    Z,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapConfig {
    pub axis: KernelAxis,
    /// Separations scanned, units 1/m.
    pub min: f64,
    pub max: f64,
    pub step: f64,
    /// Width of the Gaussian time windows for the t-axis scan, units 1/m.
    pub window_width: f64,
    pub tau: f64,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        Self { axis: KernelAxis::Z, min: 0.0, max: 10.0, step: 0.1, window_width: 1.0, tau: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    pub rapidity: f64,
    /// Units 1/m.
    pub tau: f64,
    /// Richardson-extrapolated stencil step for the main comparison.
    pub step: f64,
    /// Decreasing raw-stencil steps for the convergence order.
    pub refinement: Vec<f64>,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self { rapidity: 0.3, tau: 1.0, step: 0.05, refinement: vec![0.2, 0.1, 0.05] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the working directory.
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

impl RunConfig {
    /// Parses and validates; `base` is the directory that relative state-file
    /// paths are resolved against.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        if let StateSource::File(p) = &mut cfg.state {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn shipped_default() -> Self {
        Self::from_toml(DEFAULT_CONFIG, Path::new(".")).expect("shipped default config is valid")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        Mass::new(self.mass).map_err(CliError::from)?;
        if let StateSource::File(p) = &self.state {
            if !p.is_file() {
                return Err(CliError::config(format!("state file {} does not exist", p.display())));
            }
        }
        let slot = |name: &str, spec: &GridSpec, chart: ChartKind, time_map: Option<bool>| -> Result<(), CliError> {
            spec.validate().map_err(|e| CliError::config(format!("grids.{name}: {e}")))?;
            if spec.chart() != chart {
                return Err(CliError::config(format!("grids.{name} must use the {chart} chart")));
            }
            if let (Some(want_log), GridSpec::Spherical { radial, .. }) = (time_map, spec) {
                let is_log = matches!(radial, RadialMap::TimeLog { .. });
                if is_log != want_log {
                    let map = if want_log { "time_log" } else { "linear" };
                    return Err(CliError::config(format!("grids.{name} needs the {map} radial map")));
                }
            }
            Ok(())
        };
        slot("spherical", &self.grids.spherical, ChartKind::Spherical, Some(false))?;
        slot("time", &self.grids.time, ChartKind::Spherical, Some(true))?;
        slot("hyperbolic", &self.grids.hyperbolic, ChartKind::Hyperbolic, None)?;
        self.truncation.position().validate().map_err(|e| CliError::config(format!("truncation: {e}")))?;
        if self.taus.is_empty() || self.taus.iter().any(|t| !t.is_finite()) {
            return Err(CliError::config("taus must be a non-empty list of finite values"));
        }
        self.time_axis.validate("time_axis")?;
        self.position_axis.validate("position_axis")?;
        let o = &self.overlap;
        AxisRange { min: o.min, max: o.max, step: o.step }.validate("overlap")?;
        if !(o.window_width > 0.0) {
            return Err(CliError::config("overlap.window_width must be positive"));
        }
        let c = &self.covariance;
        if !(c.step > 0.0 && c.step < 0.5) {
            return Err(CliError::config("covariance.step must lie in (0, 0.5)"));
        }
        if c.refinement.len() < 2 || c.refinement.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
            return Err(CliError::config("covariance.refinement needs at least two positive, decreasing steps"));
        }
        if self.spectrum.n_min > self.spectrum.n_max {
            return Err(CliError::config("spectrum.n_min exceeds spectrum.n_max"));
        }
        Ok(())
    }

    pub fn mass(&self) -> Mass {
        Mass::new(self.mass).expect("validated mass")
    }

    pub fn grid(&self, spec: GridSpec) -> Result<QuadratureGrid, CliError> {
        build_grid(spec, self.mass()).map_err(CliError::from)
    }

    /// The state normalized on a grid of the requested chart: `preferred` for
    /// a constructed state, the file's own grid for a sampled one.
    pub fn state_on(&self, preferred: GridSpec) -> Result<(PhysState, QuadratureGrid), CliError> {
        match &self.state {
            StateSource::Gaussian(spec) => {
                let grid = self.grid(preferred)?;
                let state = spec.build(&grid).map_err(CliError::from)?;
                Ok((state, grid))
            }
            StateSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read state file {}: {e}", path.display())))?;
                let file: StateFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("state file {}: {e}", path.display())))?;
                let (state, grid) = file.into_state().map_err(CliError::from)?;
                if grid.chart() != preferred.chart() {
                    return Err(CliError::config(format!(
                        "state file {} is sampled on the {} chart; this command needs the {} chart",
                        path.display(),
                        grid.chart(),
                        preferred.chart()
                    )));
                }
                if grid.mass().value() != self.mass {
                    return Err(CliError::config("state file mass differs from the config mass"));
                }
                Ok((state, grid))
            }
        }
    }
}
