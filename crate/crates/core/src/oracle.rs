//! Monte-Carlo power function value oracle.
//!
//! Power at a chromosome is the fraction of `nsim` simulated regressions in
//! which the configured test rejects its null hypothesis. Each chromosome owns
//! a seed derived from the master seed and its grid indices, and replication
//! `i` reads its own ChaCha substream, so an estimate is a pure function of
//! `(chromosome, config, master_seed)`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::chromosome_seed;
use crate::space::{Chromosome, SearchSpace};
use crate::stats::{fit_and_test, generate_mlr_sample, RegressorScheme, TestSpec};

/// Re-draws allowed for a replication whose fit is degenerate.
pub const MAX_RETRIES: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub nsim: u32,
    pub alpha: f64,
    pub sigma2: f64,
    pub test: TestSpec,
    #[serde(default)]
    pub scheme: RegressorScheme,
}

impl OracleConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.nsim == 0 {
            return Err(Error::config("oracle.nsim", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(
                "oracle.alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config(
                "oracle.sigma2",
                format!("must be finite and > 0, got {}", self.sigma2),
            ));
        }
        self.test.validate(p)?;
        self.scheme.validate(p)
    }
}

/// Number of oracle evaluations performed so far.
#[derive(Debug, Default)]
pub struct QueryCounter(AtomicU64);

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Anything that maps a chromosome to a power value in `[0, 1]`.
///
/// The GA and the brute-force baseline are generic over this, which keeps
/// them testable against cheap synthetic manifolds.
pub trait PowerOracle: Sync {
    fn power(&self, chromosome: &Chromosome) -> Result<f64>;
}

impl<F> PowerOracle for F
where
    F: Fn(&Chromosome) -> Result<f64> + Sync,
{
    fn power(&self, chromosome: &Chromosome) -> Result<f64> {
        self(chromosome)
    }
}

/// Rejection frequency of the configured test at `chromosome`.
pub fn estimate_power(
    chromosome: &Chromosome,
    space: &SearchSpace,
    cfg: &OracleConfig,
    master_seed: u64,
) -> Result<f64> {
    let wrap = |source: Error| Error::Oracle {
        chromosome: chromosome.genes().iter().map(|&g| g as usize).collect(),
        source: Box::new(source),
    };
    let (beta, n) = space.decode_parts(chromosome).map_err(wrap)?;
    let seed = chromosome_seed(master_seed, chromosome);

    let mut rejections = 0u32;
    for replication in 0..u64::from(cfg.nsim) {
        if replicate(&beta, n, cfg, seed, replication).map_err(wrap)? {
            rejections += 1;
        }
    }
    Ok(f64::from(rejections) / f64::from(cfg.nsim))
}

fn replicate(beta: &[f64], n: usize, cfg: &OracleConfig, seed: u64, replication: u64) -> Result<bool> {
    let mut last = None;
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replication * (MAX_RETRIES + 1) + attempt);
        let (x, y) = generate_mlr_sample(beta, n, cfg.sigma2, cfg.scheme, &mut rng)?;
        match fit_and_test(&x, &y, &cfg.test, cfg.alpha) {
            Ok(result) => return Ok(result.reject),
            Err(e @ (Error::SingularDesign { .. } | Error::DegenerateFit(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt was made"))
}

/// The multiple-linear-regression oracle bound to a space, config and seed.
#[derive(Debug)]
pub struct MlrPowerOracle {
    space: SearchSpace,
    config: OracleConfig,
    master_seed: u64,
    counter: QueryCounter,
}

impl MlrPowerOracle {
    pub fn new(space: SearchSpace, config: OracleConfig, master_seed: u64) -> Result<Self> {
        config.validate(space.num_coefficients())?;
        Ok(MlrPowerOracle {
            space,
            config,
            master_seed,
            counter: QueryCounter::new(),
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn queries(&self) -> u64 {
        self.counter.total()
    }
}

impl PowerOracle for MlrPowerOracle {
    fn power(&self, chromosome: &Chromosome) -> Result<f64> {
        self.counter.increment();
        estimate_power(chromosome, &self.space, &self.config, self.master_seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterRange;

    fn single_slope_space(beta: f64, n: f64) -> SearchSpace {
        SearchSpace::new(
            vec![ParameterRange::fixed(beta)],
            ParameterRange::new(n, n, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn cfg(nsim: u32) -> OracleConfig {
        OracleConfig {
            nsim,
            alpha: 0.05,
            sigma2: 1.0,
            test: TestSpec::t_single(1),
            scheme: RegressorScheme::Normal,
        }
    }

    #[test]
    fn overwhelming_effect_always_rejects() {
        let s = single_slope_space(5.0, 100.0);
        let c = Chromosome::new(vec![0, 0]);
        assert_eq!(estimate_power(&c, &s, &cfg(500), 1).unwrap(), 1.0);
    }

    #[test]
    fn estimate_is_multiple_of_inverse_nsim() {
        let s = single_slope_space(0.2, 40.0);
        let c = Chromosome::new(vec![0, 0]);
        let v = estimate_power(&c, &s, &cfg(37), 9).unwrap();
        let scaled = v * 37.0;
        assert!((scaled - scaled.round()).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn deterministic_per_chromosome() {
        let s = single_slope_space(0.2, 40.0);
        let c = Chromosome::new(vec![0, 0]);
        let a = estimate_power(&c, &s, &cfg(200), 42).unwrap();
        let b = estimate_power(&c, &s, &cfg(200), 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn counter_counts_calls() {
        let s = single_slope_space(0.2, 40.0);
        let oracle = MlrPowerOracle::new(s, cfg(10), 1).unwrap();
        let c = Chromosome::new(vec![0, 0]);
        oracle.power(&c).unwrap();
        oracle.power(&c).unwrap();
        assert_eq!(oracle.queries(), 2);
    }

    #[test]
    fn config_validation_names_fields() {
        let s = single_slope_space(0.2, 40.0);
        let mut bad = cfg(10);
        bad.alpha = 1.0;
        let err = MlrPowerOracle::new(s.clone(), bad, 1).unwrap_err();
        assert!(err.to_string().contains("oracle.alpha"));
        let mut bad = cfg(0);
        bad.nsim = 0;
        assert!(MlrPowerOracle::new(s.clone(), bad, 1).unwrap_err().to_string().contains("oracle.nsim"));
        let mut bad = cfg(10);
        bad.test = TestSpec::t_single(2);
        assert!(MlrPowerOracle::new(s, bad, 1).unwrap_err().to_string().contains("oracle.test"));
    }

    #[test]
    fn out_of_grid_chromosome_is_reported() {
        let s = single_slope_space(0.2, 40.0);
        let err = estimate_power(&Chromosome::new(vec![1, 0]), &s, &cfg(10), 1).unwrap_err();
        match err {
            Error::Oracle { chromosome, .. } => assert_eq!(chromosome, vec![1, 0]),
            other => panic!("unexpected {other}"),
        }
    }
}
