//! Run configuration: a TOML file, defaults for anything it omits, and
//! command-line overrides on top.

use std::path::{Path, PathBuf};

use clap::Args;
use powerga::{GaConfig, Metric, OracleConfig, ParameterRange, RegressorScheme, SearchSpace, TestSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub master_seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub predictor: PredictorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceSection {
    pub coefficients: Vec<ParameterRange>,
    pub sample_size: ParameterRange,
}

impl Default for SpaceSection {
    fn default() -> Self {
        SpaceSection {
            coefficients: vec![
                ParameterRange { lower: 0.10, upper: 0.30, step: 0.05 },
                ParameterRange { lower: 0.30, upper: 0.90, step: 0.05 },
                // assumed range
                ParameterRange { lower: 0.05, upper: 0.50, step: 0.05 },
            ],
            // assumed lower bound
            sample_size: ParameterRange { lower: 50.0, upper: 500.0, step: 5.0 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub nsim: u32,
    pub alpha: f64,
    /// assumed range
    pub sigma2: f64,
    pub test: TestSpec,
    pub scheme: RegressorScheme,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            nsim: 1000,
            alpha: 0.05,
            sigma2: 1.0,
            test: TestSpec::t_single(3),
            scheme: RegressorScheme::Experiment,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population_size: usize,
    pub iterations: usize,
    pub lambda: f64,
    pub mutation_prob: f64,
}

impl Default for GaSection {
    fn default() -> Self {
        GaSection {
            population_size: 1000,
            iterations: 10,
            lambda: 1.0,
            mutation_prob: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorSection {
    pub k: usize,
    pub metric: Metric,
}

impl Default for PredictorSection {
    fn default() -> Self {
        PredictorSection {
            k: 5,
            metric: Metric::NormalizedEuclidean,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub grid_budget: u128,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("powerga-out"),
            grid_budget: powerga::baseline::DEFAULT_GRID_BUDGET,
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }
}

/// Flags shared by the commands that run the oracle; each one wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parallel oracle evaluations; results do not depend on it
    #[arg(short, long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub nsim: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Population size N
    #[arg(long)]
    pub population: Option<usize>,
    /// Reproduction cycles I
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    /// Output directory
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Largest grid the brute-force command will evaluate
    #[arg(long)]
    pub grid_budget: Option<u128>,
}

/// Fully resolved and validated configuration; written into run metadata.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub master_seed: u64,
    pub workers: usize,
    pub space: SearchSpace,
    pub oracle: OracleConfig,
    pub ga: GaConfig,
    pub predictor: PredictorSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn resolve(o: &Overrides) -> CliResult<Self> {
        let mut f = FileConfig::load(o.config.as_deref())?;
        if let Some(v) = o.seed {
            f.master_seed = Some(v);
        }
        if let Some(v) = o.workers {
            f.workers = Some(v);
        }
        if let Some(v) = o.nsim {
            f.oracle.nsim = v;
        }
        if let Some(v) = o.alpha {
            f.oracle.alpha = v;
        }
        if let Some(v) = o.sigma2 {
            f.oracle.sigma2 = v;
        }
        if let Some(v) = o.population {
            f.ga.population_size = v;
        }
        if let Some(v) = o.iterations {
            f.ga.iterations = v;
        }
        if let Some(v) = o.lambda {
            f.ga.lambda = v;
        }
        if let Some(v) = o.mutation_prob {
            f.ga.mutation_prob = v;
        }
        if let Some(v) = &o.out {
            f.output.dir = v.clone();
        }
        if let Some(v) = o.grid_budget {
            f.output.grid_budget = v;
        }
        Self::validate(f)
    }

    fn validate(f: FileConfig) -> CliResult<Self> {
        let master_seed = f
            .master_seed
            .ok_or_else(|| CliError::invalid("master_seed", "missing required field (set it in the file or pass --seed)"))?;
        let workers = f.workers.unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(CliError::invalid("workers", "must be >= 1"));
        }
        let space = SearchSpace::new(f.space.coefficients, f.space.sample_size)?;
        let oracle = OracleConfig {
            nsim: f.oracle.nsim,
            alpha: f.oracle.alpha,
            sigma2: f.oracle.sigma2,
            test: f.oracle.test,
            scheme: f.oracle.scheme,
        };
        oracle.validate(space.num_coefficients())?;
        let ga = GaConfig {
            population_size: f.ga.population_size,
            iterations: f.ga.iterations,
            lambda: f.ga.lambda,
            mutation_prob: f.ga.mutation_prob,
            master_seed,
        };
        ga.validate()?;
        if f.predictor.k == 0 {
            return Err(CliError::invalid("predictor.k", "must be >= 1"));
        }
        if f.output.grid_budget == 0 {
            return Err(CliError::invalid("output.grid_budget", "must be >= 1"));
        }
        Ok(RunConfig {
            master_seed,
            workers,
            space,
            oracle,
            ga,
            predictor: f.predictor,
            output: f.output,
        })
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        let f: FileConfig = toml::from_str(text).map_err(|e| CliError::ConfigFile {
            path: "inline".into(),
            detail: e.to_string(),
        })?;
        RunConfig::validate(f)
    }

    #[test]
    fn defaults_follow_the_experiment_setup() {
        let cfg = parse("master_seed = 1").unwrap();
        assert_eq!(cfg.space.grid_counts(), vec![5, 13, 10, 91]);
        assert_eq!(cfg.oracle.nsim, 1000);
        assert_eq!(cfg.oracle.test, TestSpec::t_single(3));
        assert_eq!(cfg.ga.lambda, 1.0);
        assert_eq!(cfg.ga.mutation_prob, 0.05);
        assert_eq!(cfg.predictor.k, 5);
    }

    #[test]
    fn missing_seed_is_named() {
        let err = parse("workers = 2").unwrap_err();
        assert!(err.to_string().contains("master_seed"), "{err}");
    }

    #[test]
    fn errors_carry_field_paths() {
        let cases = [
            ("master_seed = 1\n[ga]\npopulation_size = 1", "ga.population_size"),
            ("master_seed = 1\n[oracle]\nalpha = 2.0", "oracle.alpha"),
            ("master_seed = 1\n[oracle]\nnsim = 0", "oracle.nsim"),
            ("master_seed = 1\n[predictor]\nk = 0", "predictor.k"),
            ("master_seed = 1\nworkers = 0", "workers"),
            (
                "master_seed = 1\n[space]\ncoefficients = [{lower = 0.3, upper = 0.1, step = 0.05}]\n[oracle]\ntest = {kind = \"t_single\", indices = [1]}\nscheme = \"normal\"",
                "space.coefficients[0]",
            ),
            (
                "master_seed = 1\n[space]\ncoefficients = [{lower = 0.1, upper = 0.3, step = 0.05}]",
                "oracle.test",
            ),
        ];
        for (text, field) in cases {
            let err = parse(text).unwrap_err();
            assert!(err.to_string().contains(field), "{field}: {err}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("master_seed = 1\n[ga]\npopulation = 10").unwrap_err();
        assert!(err.to_string().contains("population"), "{err}");
    }
}
