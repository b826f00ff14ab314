//! Experiment configuration documents.

use std::fmt;
use std::path::Path;

use mcvd_core::control::{ControlParams, TrafficModel};
use mcvd_core::model::{validate_topology, MediumParams, Point, Topology, ValidityReport};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Far-field factor used for validation warnings.
pub const FAR_FIELD_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "uM")]
    UM,
    #[serde(rename = "r_SP")]
    RSp,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "t")]
    T,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "Tb")]
    Tb,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::UM => "uM",
            SweepVariable::RSp => "r_SP",
            SweepVariable::Eta => "eta",
            SweepVariable::T => "t",
            SweepVariable::Mu => "mu",
            SweepVariable::Tb => "Tb",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `steps` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.stop } else { self.start + span * i as f64 / last })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(ConfigError::invalid("sweep range must be finite"));
        }
        if self.start > self.stop {
            return Err(ConfigError::invalid(format!(
                "sweep range must be ordered, got start {} > stop {}",
                self.start, self.stop
            )));
        }
        if self.steps < 1 {
            return Err(ConfigError::invalid("sweep needs at least one step"));
        }
        Ok(())
    }
}

/// Particle-simulation knobs. Horizon, binning and seed come from the recipe
/// and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub dt: f64,
    pub n_particles: u64,
    #[serde(default = "default_batch_size")]
    pub batch_size: u64,
    #[serde(default = "default_true")]
    pub far_jumps: bool,
}

fn default_batch_size() -> u64 {
    4096
}

fn default_true() -> bool {
    true
}

/// Placements of the second receiver around the first one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementGrid {
    /// Centre-to-centre distances, μm.
    pub separations: Vec<f64>,
    /// Directions from the first receiver; normalised before use.
    pub directions: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub recipe: String,
    pub medium: MediumParams,
    pub topology: Topology,
    pub traffic: TrafficModel,
    pub control: ControlParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSettings>,
    pub sweep: Sweep,
    /// Slot `l` at which schedules and error rates are evaluated.
    pub slot: usize,
    /// Number of slots in a budget schedule.
    pub horizon: usize,
    /// Upper end of the integer threshold grid.
    pub eta_max: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed_etas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PlacementGrid>,
    /// `x_S` is placed at `y_P + r_SP · direction` when `r_SP` is swept.
    pub r_sp_direction: Point,
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Parse,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl ConfigError {
    pub fn invalid(message: impl Into<String>) -> Self {
        ConfigError { kind: ErrorKind::Invalid, message: message.into(), line: None, column: None, context: None }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<mcvd_core::Error> for ConfigError {
    fn from(e: mcvd_core::Error) -> Self {
        ConfigError::invalid(e.to_string())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let line = e.line();
            let context = text.lines().nth(line.saturating_sub(1)).map(|s| s.trim().to_string());
            ConfigError {
                kind: ErrorKind::Parse,
                message: e.to_string(),
                line: Some(line),
                column: Some(e.column()),
                context,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            kind: ErrorKind::Io,
            message: format!("cannot read {}: {e}", path.display()),
            line: None,
            column: None,
            context: None,
        })?;
        let cfg = Self::from_json(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Hard checks. Near-field placements are reported by [`Self::warnings`].
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.medium.validate()?;
        self.topology.validate()?;
        self.traffic.validate()?;
        self.control.validate()?;
        self.sweep.validate()?;
        if self.slot < 1 {
            return Err(ConfigError::invalid("slot must be >= 1"));
        }
        if self.horizon < self.slot {
            return Err(ConfigError::invalid(format!(
                "horizon {} must cover slot {}",
                self.horizon, self.slot
            )));
        }
        if self.eta_max < 1 {
            return Err(ConfigError::invalid("eta_max must be >= 1"));
        }
        if let Some(s) = &self.sim {
            if !(s.dt > 0.0 && s.dt.is_finite()) || s.n_particles < 1 || s.batch_size < 1 {
                return Err(ConfigError::invalid("sim needs dt > 0, n_particles >= 1 and batch_size >= 1"));
            }
        }
        for &mu in &self.mu_values {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(ConfigError::invalid(format!("mu_values entries must be finite and >= 0, got {mu}")));
            }
        }
        for &eta in &self.fixed_etas {
            if !(eta >= 1.0 && eta.is_finite()) {
                return Err(ConfigError::invalid(format!("fixed_etas entries must be >= 1, got {eta}")));
            }
        }
        if let Some(g) = &self.grid {
            if g.separations.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                return Err(ConfigError::invalid("grid separations must be positive"));
            }
            if g.directions.iter().any(|d| norm(d) == 0.0) {
                return Err(ConfigError::invalid("grid directions must be nonzero"));
            }
        }
        if norm(&self.r_sp_direction) == 0.0 {
            return Err(ConfigError::invalid("r_sp_direction must be nonzero"));
        }
        Ok(())
    }

    pub fn warnings(&self) -> ValidityReport {
        validate_topology(&self.topology, FAR_FIELD_FACTOR)
    }

    /// Copy with `x_S` placed `r` from `y_P` along `r_sp_direction`.
    pub fn with_r_sp(&self, r: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        out.topology.x_s = offset(&self.topology.y_p, &self.r_sp_direction, r);
        out.topology.validate()?;
        Ok(out)
    }

    /// Copy with a swept scalar applied. `eta` and `t` are recipe-level and
    /// leave the configuration untouched.
    pub fn with_value(&self, var: SweepVariable, value: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        match var {
            SweepVariable::UM => out.control.u_m = value,
            SweepVariable::RSp => return self.with_r_sp(value),
            SweepVariable::Mu => out.medium.mu = value,
            SweepVariable::Tb => out.medium.tb = value,
            SweepVariable::Eta | SweepVariable::T => {}
        }
        out.medium.validate()?;
        out.control.validate()?;
        Ok(out)
    }
}

pub(crate) fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// `origin + r · dir / |dir|`.
pub(crate) fn offset(origin: &Point, dir: &Point, r: f64) -> Point {
    let n = norm(dir);
    [origin[0] + r * dir[0] / n, origin[1] + r * dir[1] / n, origin[2] + r * dir[2] / n]
}
