//! Batch front end for the `levy-whf` pipeline: configuration, Monte Carlo
//! validation and result files.

pub mod config;
pub mod manifest;
pub mod mc_oracle;

use std::fs;
use std::path::{Path, PathBuf};

use levy_whf::pipeline::factorize;
use levy_whf::ruin::{infinite_time_ruin, ruin_curve};
use log::info;
use serde::Serialize;

use crate::config::{Command, ConfigError, RunConfig};
use crate::manifest::{density_csv, ruin_csv, FailureRecord, InfiniteRuinRecord, Manifest, RuinRecord, ValidationRecord};
use crate::mc_oracle::{ks_distance, simulate_extrema};

/// Environment variable naming the output directory.
pub const OUT_ENV: &str = "LEVY_EXTREMA_OUT";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{stage} stage failed: {message}")]
    Numerical { stage: &'static str, message: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            stage: Option<&'a str>,
            message: String,
            exit_code: i32,
        }
        let (kind, stage) = match self {
            RunError::Config(_) => ("config", None),
            RunError::Numerical { stage, .. } => ("numerical", Some(*stage)),
            RunError::Io { .. } => ("io", None),
        };
        serde_json::to_string(&Record { error: kind, stage, message: self.to_string(), exit_code: self.exit_code() })
            .expect("error record serializes")
    }
}

/// `--out`, then the environment, then the config, then `out`.
pub fn output_dir(cli: Option<&Path>, env: Option<&str>, config: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Files produced by a run, as `(name, contents)`.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub manifest: Manifest,
    pub files: Vec<(String, Vec<u8>)>,
}

/// Computes every artifact of `command` without touching the filesystem.
pub fn execute(command: Command, config: &RunConfig, seed: Option<u64>) -> Result<Artifacts, RunError> {
    config.check_command(command)?;
    let resolved = config.resolve()?;
    let (model, stop, opts) = (&resolved.model, &resolved.stop, &resolved.options);
    info!("{} on {} with q = {}", command.name(), model.family_name(), stop.q());

    let f = factorize(model, stop, opts).map_err(|e| RunError::Numerical { stage: e.stage.name(), message: e.source.to_string() })?;
    let mut manifest = Manifest::new(command.name(), model.family_name(), &f, opts.order.p(), config);
    let mut files = Vec::new();

    match command {
        Command::Factorize => {}
        Command::Density => {
            files.push(("density_sup.csv".to_string(), density_csv(&f.supremum).into_bytes()));
            files.push(("density_inf.csv".to_string(), density_csv(&f.infimum).into_bytes()));
        }
        Command::Ruin => {
            let curve = ruin_curve(&f.infimum, &config.ruin.reserves)
                .map_err(|e| RunError::Numerical { stage: "ruin", message: e.to_string() })?;
            let infinite = match &config.ruin.infinite {
                None => None,
                Some(spec) => {
                    let r = infinite_time_ruin(model, config.stopping.kind(), spec.reserve, &spec.rates, opts)
                        .map_err(|e| RunError::Numerical { stage: "ruin", message: e.to_string() })?;
                    Some(InfiniteRuinRecord {
                        reserve: spec.reserve,
                        rates: r.rates,
                        values: r.values,
                        limit: r.limit,
                        monotone: r.monotone,
                        failures: r
                            .failures
                            .into_iter()
                            .map(|(rate, e)| FailureRecord { rate, stage: e.stage.name(), message: e.source.to_string() })
                            .collect(),
                    })
                }
            };
            files.push(("ruin.csv".to_string(), ruin_csv(&curve.reserves, &curve.probabilities).into_bytes()));
            manifest.ruin = Some(RuinRecord {
                reserves: curve.reserves,
                probabilities: curve.probabilities,
                bound_value: f.bound,
                infinite,
            });
        }
        Command::Validate => {
            let sim = config.validate.build(seed);
            let samples = simulate_extrema(model, stop, &sim)
                .map_err(|e| RunError::Numerical { stage: "simulate", message: e.to_string() })?;
            let sups: Vec<f64> = samples.iter().map(|e| e.sup).collect();
            let infs: Vec<f64> = samples.iter().map(|e| e.inf).collect();
            let ks = |s: &[f64], d| ks_distance(s, d).map_err(|e| RunError::Numerical { stage: "validate", message: e.to_string() });
            manifest.validation = Some(ValidationRecord {
                paths: sim.paths,
                dt: sim.dt,
                seed: sim.seed,
                bridge: sim.bridge,
                ks_sup: ks(&sups, &f.supremum)?,
                ks_inf: ks(&infs, &f.infimum)?,
            });
        }
    }
    files.insert(0, ("manifest.json".to_string(), manifest.to_json()));
    Ok(Artifacts { manifest, files })
}

/// Runs `command` and writes its artifacts to `out`.
pub fn run(command: Command, config: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Artifacts, RunError> {
    let artifacts = execute(command, config, seed)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(out).map_err(io(out))?;
    for (name, bytes) in &artifacts.files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    Ok(artifacts)
}
