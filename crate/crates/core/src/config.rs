//! Experiment files.
//!
//! An experiment is a small TOML document with one table per stage:
//!
//! ```toml
//! [geometry]
//! preset = true
//! side = 100.0
//! num_ues = 10
//! bs_antennas = 128
//! ue_antennas = 4
//! path_loss_exponent = 2.0
//!
//! [estimation]
//! variance_fraction = 0.01
//! attenuation_error = "variance"
//!
//! [constraints]
//! total_power_dbm = 60.0
//! interference_dbm = 0.0
//! min_rate = 1.0
//! noise_dbm = 0.0
//!
//! [sweep]
//! variable = "bs_antennas"
//! values = [32, 64, 128, 256]
//!
//! [runtime]
//! trials = 1000
//! seed = 1
//! solvers = "all"
//! ```
//!
//! Unknown keys are rejected. Powers are given in dBm and converted once,
//! when the per-point [`ConstraintSet`] is built.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::admission::{ConstraintSet, IlpOptions, Solver, SolverOptions};
use crate::array::{GeometryConfig, Position, PRESET_PU_POSITIONS};
use crate::estimation::{AttenuationError, EstimationConfig};
use crate::{Error, Result};

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NumUes,
    BsAntennas,
    TotalPowerDbm,
    InterferenceDbm,
    MinRate,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NumUes => "num_ues",
            SweepVariable::BsAntennas => "bs_antennas",
            SweepVariable::TotalPowerDbm => "total_power_dbm",
            SweepVariable::InterferenceDbm => "interference_dbm",
            SweepVariable::MinRate => "min_rate",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, SweepVariable::NumUes | SweepVariable::BsAntennas)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Constraint values as written in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintsDbm {
    pub total_power_dbm: f64,
    pub interference_dbm: f64,
    pub min_rate: f64,
    pub noise_dbm: f64,
}

impl ConstraintsDbm {
    pub fn to_linear(&self) -> ConstraintSet {
        ConstraintSet::from_dbm(
            self.total_power_dbm,
            self.interference_dbm,
            self.min_rate,
            self.noise_dbm,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: bool,
    pub geometry: GeometryConfig,
    pub estimation: EstimationConfig,
    pub constraints: ConstraintsDbm,
    pub sweep: Sweep,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<Solver>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub solver_options: SolverOptions,
}

/// Parameters of a single sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    pub geometry: GeometryConfig,
    pub estimation: EstimationConfig,
    pub constraints: ConstraintSet,
}

impl ExperimentConfig {
    /// Reference setup: `K = 10`, `M_b = 128`, `M_u = 4`, `P⁰ = 60 dBm`,
    /// `I⁰ = 0 dBm`, `R⁰ = 1`, `σ_w² = 0 dBm`, 1000 trials, every solver,
    /// sweeping `M_b` over 32..256.
    pub fn reference() -> Self {
        Self {
            preset: true,
            geometry: GeometryConfig::reference(),
            estimation: EstimationConfig::default(),
            constraints: ConstraintsDbm {
                total_power_dbm: 60.0,
                interference_dbm: 0.0,
                min_rate: 1.0,
                noise_dbm: 0.0,
            },
            sweep: Sweep {
                variable: SweepVariable::BsAntennas,
                values: vec![32.0, 64.0, 128.0, 256.0],
            },
            trials: 1000,
            seed: 1,
            solvers: Solver::ALL.to_vec(),
            threads: 0,
            solver_options: SolverOptions::default(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config(raw_key(&e, text), e.message().to_string()))?;
        let config = raw.resolve()?;
        config.validate()?;
        Ok(config)
    }

    /// Geometry and linear constraints with the sweep variable set to `value`.
    pub fn point(&self, value: f64) -> PointConfig {
        let mut geometry = self.geometry.clone();
        let mut c = self.constraints;
        match self.sweep.variable {
            SweepVariable::NumUes => geometry.num_ues = value as usize,
            SweepVariable::BsAntennas => geometry.bs_antennas = value as usize,
            SweepVariable::TotalPowerDbm => c.total_power_dbm = value,
            SweepVariable::InterferenceDbm => c.interference_dbm = value,
            SweepVariable::MinRate => c.min_rate = value,
        }
        PointConfig {
            geometry,
            estimation: self.estimation,
            constraints: c.to_linear(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("runtime.trials", "at least one trial is required"));
        }
        if self.solvers.is_empty() {
            return Err(Error::config("runtime.solvers", "no solver selected"));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::config("sweep.values", "sweep needs at least one value"));
        }
        self.estimation.validate()?;
        for value in &self.sweep.values {
            if !value.is_finite() {
                return Err(Error::config("sweep.values", format!("{value} is not finite")));
            }
            if self.sweep.variable.is_count() && (value.fract() != 0.0 || *value < 1.0) {
                return Err(Error::config(
                    "sweep.values",
                    format!("{} takes positive integers, got {value}", self.sweep.variable),
                ));
            }
            let point = self.point(*value);
            point.geometry.validate().map_err(|e| in_sweep(e, *value))?;
            point.constraints.validate().map_err(|e| in_sweep(e, *value))?;
        }
        Ok(())
    }

    /// Every consumed key with its resolved value, in file order.
    pub fn table(&self) -> Vec<(String, String)> {
        let g = &self.geometry;
        let c = &self.constraints;
        let rows = vec![
            ("geometry.preset", self.preset.to_string()),
            ("geometry.side", g.side.to_string()),
            ("geometry.num_ues", g.num_ues.to_string()),
            ("geometry.bs_antennas", g.bs_antennas.to_string()),
            ("geometry.ue_antennas", g.ue_antennas.to_string()),
            ("geometry.path_loss_exponent", g.path_loss_exponent.to_string()),
            (
                "geometry.pu1",
                format!("[{}, {}]", g.pu_positions[0].x, g.pu_positions[0].y),
            ),
            (
                "geometry.pu2",
                format!("[{}, {}]", g.pu_positions[1].x, g.pu_positions[1].y),
            ),
            (
                "estimation.variance_fraction",
                self.estimation.variance_fraction.to_string(),
            ),
            (
                "estimation.attenuation_error",
                match self.estimation.error_model {
                    AttenuationError::Variance => "variance".to_string(),
                    AttenuationError::StdDev => "std_dev".to_string(),
                },
            ),
            ("constraints.total_power_dbm", c.total_power_dbm.to_string()),
            ("constraints.interference_dbm", c.interference_dbm.to_string()),
            ("constraints.min_rate", c.min_rate.to_string()),
            ("constraints.noise_dbm", c.noise_dbm.to_string()),
            ("sweep.variable", self.sweep.variable.to_string()),
            (
                "sweep.values",
                format!(
                    "[{}]",
                    self.sweep
                        .values
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ),
            ("runtime.trials", self.trials.to_string()),
            ("runtime.seed", self.seed.to_string()),
            (
                "runtime.solvers",
                format!(
                    "[{}]",
                    self.solvers.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
                ),
            ),
            ("runtime.threads", self.threads.to_string()),
            (
                "runtime.redistribute_equal_power",
                self.solver_options.redistribute_equal_power.to_string(),
            ),
            (
                "runtime.ilp_exhaustive_limit",
                self.solver_options.ilp.exhaustive_limit.to_string(),
            ),
            (
                "runtime.ilp_branch_and_bound",
                self.solver_options.ilp.branch_and_bound.to_string(),
            ),
        ];
        rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

fn in_sweep(error: Error, value: f64) -> Error {
    match error {
        Error::Config { key, message } => Error::Config {
            key,
            message: format!("{message} (at sweep value {value})"),
        },
        other => other,
    }
}

/// Field name quoted in a deserialization error, prefixed by its table when known.
fn raw_key(error: &toml::de::Error, text: &str) -> String {
    let message = error.message();
    // "unknown field `foo`, expected ..." and "missing field `foo`"
    let field = message.find('`').and_then(|start| {
        let len = message[start + 1..].find('`')?;
        Some(&message[start + 1..start + 1 + len])
    });
    let table = error.span().and_then(|span| {
        text[..span.end.min(text.len())]
            .lines()
            .rev()
            .map(str::trim)
            .find(|l| l.starts_with('[') && l.ends_with(']'))
            .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim())
    });
    const TABLES: [&str; 5] = ["geometry", "estimation", "constraints", "sweep", "runtime"];
    match (table, field) {
        (_, Some(f)) if TABLES.contains(&f) => f.to_string(),
        (Some(t), Some(f)) => format!("{t}.{f}"),
        (_, Some(f)) => f.to_string(),
        (Some(t), None) => t.to_string(),
        (None, None) => "config".to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: RawGeometry,
    #[serde(default)]
    estimation: RawEstimation,
    constraints: RawConstraints,
    sweep: RawSweep,
    #[serde(default)]
    runtime: RawRuntime,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(default)]
    preset: bool,
    side: f64,
    num_ues: usize,
    bs_antennas: usize,
    ue_antennas: usize,
    #[serde(default = "default_path_loss")]
    path_loss_exponent: f64,
    pu1: Option<[f64; 2]>,
    pu2: Option<[f64; 2]>,
}

fn default_path_loss() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimation {
    #[serde(default = "default_variance_fraction")]
    variance_fraction: f64,
    #[serde(default)]
    attenuation_error: AttenuationErrorName,
}

impl Default for RawEstimation {
    fn default() -> Self {
        Self {
            variance_fraction: default_variance_fraction(),
            attenuation_error: AttenuationErrorName::Variance,
        }
    }
}

fn default_variance_fraction() -> f64 {
    0.01
}

#[derive(Debug, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
enum AttenuationErrorName {
    #[default]
    Variance,
    StdDev,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    total_power_dbm: f64,
    interference_dbm: f64,
    min_rate: f64,
    noise_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: SweepVariable,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SolverChoice {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRuntime {
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_solvers")]
    solvers: SolverChoice,
    #[serde(default)]
    threads: usize,
    #[serde(default)]
    redistribute_equal_power: bool,
    #[serde(default = "default_exhaustive_limit")]
    ilp_exhaustive_limit: usize,
    #[serde(default = "default_true")]
    ilp_branch_and_bound: bool,
}

impl Default for RawRuntime {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            seed: default_seed(),
            solvers: default_solvers(),
            threads: 0,
            redistribute_equal_power: false,
            ilp_exhaustive_limit: default_exhaustive_limit(),
            ilp_branch_and_bound: true,
        }
    }
}

fn default_trials() -> usize {
    1000
}
fn default_seed() -> u64 {
    1
}
fn default_solvers() -> SolverChoice {
    SolverChoice::One("all".into())
}
fn default_exhaustive_limit() -> usize {
    IlpOptions::default().exhaustive_limit
}
fn default_true() -> bool {
    true
}

fn parse_solver(name: &str) -> Result<Vec<Solver>> {
    match name {
        "all" => Ok(Solver::ALL.to_vec()),
        "equal_power" => Ok(vec![Solver::EqualPower]),
        "equal_rate" => Ok(vec![Solver::EqualRate]),
        "ilp" => Ok(vec![Solver::Ilp]),
        other => Err(Error::config(
            "runtime.solvers",
            format!("unknown solver `{other}`; expected equal_power, equal_rate, ilp or all"),
        )),
    }
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig> {
        let g = self.geometry;
        let pu_positions = if g.preset {
            for (key, value) in [("geometry.pu1", g.pu1), ("geometry.pu2", g.pu2)] {
                if let Some(p) = value {
                    let expected = if key.ends_with('1') {
                        PRESET_PU_POSITIONS[0]
                    } else {
                        PRESET_PU_POSITIONS[1]
                    };
                    if Position::new(p[0], p[1]) != expected {
                        return Err(Error::config(key, "conflicts with preset = true"));
                    }
                }
            }
            PRESET_PU_POSITIONS
        } else {
            let pu1 = g
                .pu1
                .ok_or_else(|| Error::config("geometry.pu1", "required when preset = false"))?;
            let pu2 = g
                .pu2
                .ok_or_else(|| Error::config("geometry.pu2", "required when preset = false"))?;
            [Position::new(pu1[0], pu1[1]), Position::new(pu2[0], pu2[1])]
        };
        let geometry = GeometryConfig {
            side: g.side,
            num_ues: g.num_ues,
            bs_antennas: g.bs_antennas,
            ue_antennas: g.ue_antennas,
            path_loss_exponent: g.path_loss_exponent,
            pu_positions,
        };
        let estimation = EstimationConfig {
            variance_fraction: self.estimation.variance_fraction,
            error_model: match self.estimation.attenuation_error {
                AttenuationErrorName::Variance => AttenuationError::Variance,
                AttenuationErrorName::StdDev => AttenuationError::StdDev,
            },
        };
        let c = self.constraints;
        let names = match self.runtime.solvers {
            SolverChoice::One(s) => vec![s],
            SolverChoice::Many(v) => v,
        };
        let mut solvers = Vec::new();
        for name in &names {
            for s in parse_solver(name)? {
                if !solvers.contains(&s) {
                    solvers.push(s);
                }
            }
        }
        solvers.sort();
        Ok(ExperimentConfig {
            preset: g.preset,
            geometry,
            estimation,
            constraints: ConstraintsDbm {
                total_power_dbm: c.total_power_dbm,
                interference_dbm: c.interference_dbm,
                min_rate: c.min_rate,
                noise_dbm: c.noise_dbm,
            },
            sweep: Sweep {
                variable: self.sweep.variable,
                values: self.sweep.values,
            },
            trials: self.runtime.trials,
            seed: self.runtime.seed,
            solvers,
            threads: self.runtime.threads,
            solver_options: SolverOptions {
                redistribute_equal_power: self.runtime.redistribute_equal_power,
                ilp: IlpOptions {
                    exhaustive_limit: self.runtime.ilp_exhaustive_limit,
                    branch_and_bound: self.runtime.ilp_branch_and_bound,
                    ..IlpOptions::default()
                },
            },
        })
    }
}
