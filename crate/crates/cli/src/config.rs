//! Run configuration, read from TOML. Unknown keys are rejected and every
//! model parameter is validated while parsing.

use std::path::{Path, PathBuf};

use levy_whf::levy::{CosechParams, Family, GammaTerm, GhParams, MixedGammaJumps, StableParams};
use levy_whf::pipeline::{FixedCoefficients, Options};
use levy_whf::rational::{Class, PoleCount, PoleSearch};
use levy_whf::transforms::{Grid, NormOrder};
use levy_whf::{LevyModel, StoppingKind, StoppingTime};
use serde::{Deserialize, Serialize};

use crate::mc_oracle::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Factorize,
    Density,
    Ruin,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Factorize => "factorize",
            Command::Density => "density",
            Command::Ruin => "ruin",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Expected command; a mismatch with the command line is an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelSpec,
    pub stopping: StoppingSpec,
    #[serde(default)]
    pub pipeline: PipelineSpec,
    #[serde(default)]
    pub ruin: RuinSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub weight: f64,
    pub shape: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Brownian {
        drift: f64,
        volatility: f64,
    },
    CompoundPoisson {
        drift: f64,
        #[serde(default)]
        volatility: f64,
        intensity: f64,
        #[serde(default)]
        positive: Vec<JumpSpec>,
        #[serde(default)]
        negative: Vec<JumpSpec>,
    },
    SymmetricStable {
        #[serde(default)]
        drift: f64,
        index: f64,
        scale: f64,
    },
    CosechSquared {
        drift: f64,
        volatility: f64,
        #[serde(default)]
        alpha: f64,
    },
    GeneralizedHyperbolic {
        drift: f64,
        #[serde(default)]
        volatility: f64,
        lambda: f64,
        alpha: f64,
        beta: f64,
        delta: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> levy_whf::Result<LevyModel> {
        let terms = |v: &[JumpSpec]| v.iter().map(|j| GammaTerm::new(j.weight, j.shape, j.rate)).collect::<Result<Vec<_>, _>>();
        match self {
            ModelSpec::Brownian { drift, volatility } => LevyModel::brownian(*drift, *volatility),
            ModelSpec::CompoundPoisson { drift, volatility, intensity, positive, negative } => {
                let jumps = MixedGammaJumps::new(terms(positive)?, terms(negative)?, *intensity)?;
                LevyModel::new(*drift, *volatility, Family::CompoundPoisson(jumps))
            }
            ModelSpec::SymmetricStable { drift, index, scale } => {
                LevyModel::new(*drift, 0.0, Family::SymmetricStable(StableParams { index: *index, scale: *scale }))
            }
            ModelSpec::CosechSquared { drift, volatility, alpha } => {
                LevyModel::new(*drift, *volatility, Family::CosechSquared(CosechParams { alpha: *alpha }))
            }
            ModelSpec::GeneralizedHyperbolic { drift, volatility, lambda, alpha, beta, delta } => LevyModel::new(
                *drift,
                *volatility,
                Family::GeneralizedHyperbolic(GhParams { lambda: *lambda, alpha: *alpha, beta: *beta, delta: *delta }),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingKindSpec {
    Exponential,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSpec {
    pub kind: StoppingKindSpec,
    pub q: f64,
}

impl StoppingSpec {
    pub fn kind(&self) -> StoppingKind {
        match self.kind {
            StoppingKindSpec::Exponential => StoppingKind::Exponential,
            StoppingKindSpec::Geometric => StoppingKind::Geometric,
        }
    }

    pub fn build(&self) -> levy_whf::Result<StoppingTime> {
        match self.kind {
            StoppingKindSpec::Exponential => StoppingTime::exponential(self.q),
            StoppingKindSpec::Geometric => StoppingTime::geometric(self.q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleCountSpec {
    Smallest(usize),
    PerSide { upper: usize, lower: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSpec {
    Full,
    CompletelyMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSpec {
    #[serde(default)]
    pub a0: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSpec {
    pub poles: PoleCountSpec,
    pub class: ClassSpec,
    pub grid_half_width: f64,
    pub grid_nodes: usize,
    pub norm_order: f64,
    pub search_radius: f64,
    pub axis_step: f64,
    pub off_axis: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_coefficients: Option<FixedSpec>,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        let search = PoleSearch::default();
        let grid = Grid::default();
        Self {
            poles: PoleCountSpec::Smallest(3),
            class: ClassSpec::Full,
            grid_half_width: grid.half_width(),
            grid_nodes: grid.len(),
            norm_order: 2.0,
            search_radius: search.radius,
            axis_step: search.axis_step,
            off_axis: search.off_axis,
            fixed_coefficients: None,
        }
    }
}

impl PipelineSpec {
    pub fn build(&self) -> levy_whf::Result<Options> {
        let poles = match self.poles {
            PoleCountSpec::Smallest(n) => PoleCount::Smallest(n),
            PoleCountSpec::PerSide { upper, lower } => PoleCount::PerSide { upper, lower },
        };
        let class = match self.class {
            ClassSpec::Full => Class::Full,
            ClassSpec::CompletelyMonotone => Class::CompletelyMonotone,
        };
        let search = PoleSearch {
            radius: self.search_radius,
            axis_step: self.axis_step,
            off_axis: self.off_axis,
            ..PoleSearch::default()
        };
        Ok(Options {
            poles,
            search,
            class,
            grid: Grid::new(self.grid_half_width, self.grid_nodes)?,
            order: NormOrder::new(self.norm_order)?,
            fixed: self
                .fixed_coefficients
                .as_ref()
                .map(|f| FixedCoefficients { a0: f.a0, coefficients: f.coefficients.clone() }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfiniteRuinSpec {
    pub reserve: f64,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuinSpec {
    pub reserves: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinite: Option<InfiniteRuinSpec>,
}

impl Default for RuinSpec {
    fn default() -> Self {
        Self { reserves: (0..=100).map(|k| 0.1 * k as f64).collect(), infinite: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSpec {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Exponential stopping times are capped at this horizon.
    pub horizon: f64,
    pub bridge: bool,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self { paths: sim.paths, dt: sim.dt, seed: sim.seed, horizon: sim.horizon, bridge: sim.bridge }
    }
}

impl ValidateSpec {
    pub fn build(&self, seed: Option<u64>) -> SimConfig {
        SimConfig { paths: self.paths, dt: self.dt, seed: seed.unwrap_or(self.seed), horizon: self.horizon, bridge: self.bridge }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid {section}: {source}")]
    Invalid { section: &'static str, source: levy_whf::Error },
    #[error("invalid validate section: {0}")]
    Simulation(String),
    #[error("config is for command `{config}` but `{requested}` was requested")]
    CommandMismatch { config: &'static str, requested: &'static str },
}

/// Model, stopping time and pipeline options resolved from a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: LevyModel,
    pub stop: StoppingTime,
    pub options: Options,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let model = self.model.build().map_err(|source| ConfigError::Invalid { section: "model", source })?;
        let stop = self.stopping.build().map_err(|source| ConfigError::Invalid { section: "stopping", source })?;
        let options = self.pipeline.build().map_err(|source| ConfigError::Invalid { section: "pipeline", source })?;
        if self.ruin.reserves.iter().any(|u| !(*u >= 0.0 && u.is_finite())) {
            return Err(ConfigError::Invalid {
                section: "ruin",
                source: levy_whf::Error::InvalidParameter("reserves must be finite and nonnegative".into()),
            });
        }
        self.validate.build(None).check().map_err(ConfigError::Simulation)?;
        Ok(Resolved { model, stop, options })
    }

    pub fn check_command(&self, requested: Command) -> Result<(), ConfigError> {
        match self.command {
            Some(c) if c != requested => Err(ConfigError::CommandMismatch { config: c.name(), requested: requested.name() }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
        command = "factorize"

        [model]
        family = "cosech_squared"
        drift = 2.0
        volatility = 2.0
        alpha = 0.0

        [stopping]
        kind = "exponential"
        q = 5.0

        [pipeline]
        poles = { upper = 2, lower = 1 }
        class = "completely_monotone"
    "#;

    #[test]
    fn parses_example() {
        let cfg = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.pipeline.poles, PoleCountSpec::PerSide { upper: 2, lower: 1 });
        let r = cfg.resolve().unwrap();
        assert_eq!(r.model.family_name(), "cosech_squared");
        assert!(cfg.check_command(Command::Density).is_err());
        assert!(cfg.check_command(Command::Factorize).is_ok());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::from_toml(EXAMPLE).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = EXAMPLE.replace("alpha = 0.0", "alpha = 0.0\nbeta = 1.0");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Parse(_))));
        let bad = EXAMPLE.replace("[pipeline]", "[pipeline]\nsmoothing = 3");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn rejects_invalid_values() {
        let bad = EXAMPLE.replace("q = 5.0", "q = -1.0");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Invalid { section: "stopping", .. })));
        let bad = EXAMPLE.replace("alpha = 0.0", "alpha = 1.5");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Invalid { section: "model", .. })));
        let bad = EXAMPLE.replace("[pipeline]", "[pipeline]\ngrid_nodes = 1000");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Invalid { section: "pipeline", .. })));
    }
}
