//! Brute-force grid manifold and the RMSE comparison against a GA run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{evaluate_new, thread_pool, PowerDictionary};
use crate::knn::{KnnPredictor, Metric};
use crate::oracle::{MlrPowerOracle, OracleConfig, PowerOracle};
use crate::space::SearchSpace;

/// Default ceiling on the number of grid points a brute-force run may visit.
pub const DEFAULT_GRID_BUDGET: u128 = 1_000_000;

/// Oracle value at every grid point. Uses the same per-chromosome seeds as the
/// GA, so points seen by both carry identical values.
pub fn brute_force_manifold(
    space: &SearchSpace,
    cfg: &OracleConfig,
    master_seed: u64,
    budget: u128,
    workers: usize,
) -> Result<PowerDictionary> {
    let oracle = MlrPowerOracle::new(space.clone(), cfg.clone(), master_seed)?;
    brute_force_with_oracle(space, &oracle, budget, workers)
}

pub fn brute_force_with_oracle<O: PowerOracle + ?Sized>(
    space: &SearchSpace,
    oracle: &O,
    budget: u128,
    workers: usize,
) -> Result<PowerDictionary> {
    let size = space.grid_size();
    if size > budget {
        return Err(Error::GridBudget { size, budget });
    }
    let pool = thread_pool(workers)?;
    let grid: Vec<_> = space.enumerate_grid().collect();
    let mut dictionary = PowerDictionary::new();
    evaluate_new(&grid, &mut dictionary, oracle, &pool)?;
    Ok(dictionary)
}

/// Root-mean-square difference of two equally long vectors.
pub fn rmse(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    if reference.len() != candidate.len() {
        return Err(Error::domain(
            "rmse",
            format!("length mismatch: {} vs {}", reference.len(), candidate.len()),
        ));
    }
    if reference.is_empty() {
        return Err(Error::domain("rmse", "vectors must not be empty"));
    }
    let sum: f64 = reference
        .iter()
        .zip(candidate)
        .map(|(r, c)| (r - c) * (r - c))
        .sum();
    Ok((sum / reference.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Over chromosomes present in the GA dictionary.
    pub rmse_seen_only: f64,
    /// GA value where known, kNN prediction elsewhere, over the whole grid.
    pub rmse_full_grid: f64,
    pub grid_size: usize,
    pub ga_queries: usize,
    pub query_ratio: f64,
    /// Neighbors actually used (capped by the dictionary size).
    pub k: usize,
    pub ga_mean_power: f64,
    pub grid_mean_power: f64,
}

/// Compares a GA dictionary against the full brute-force grid.
pub fn evaluate(
    ga: &PowerDictionary,
    brute: &PowerDictionary,
    space: &SearchSpace,
    k: usize,
) -> Result<EvaluationReport> {
    if ga.is_empty() {
        return Err(Error::domain("evaluate", "GA dictionary is empty"));
    }
    if k == 0 {
        return Err(Error::domain("evaluate", "k must be >= 1"));
    }
    let grid: Vec<_> = space.enumerate_grid().collect();
    if brute.len() != grid.len() || grid.iter().any(|c| !brute.contains(c)) {
        return Err(Error::Structure(format!(
            "brute-force dictionary has {} entries but does not cover the {}-point grid",
            brute.len(),
            grid.len()
        )));
    }

    let mut seen_ref = Vec::with_capacity(ga.len());
    let mut seen_ga = Vec::with_capacity(ga.len());
    for (c, v) in ga.iter() {
        let reference = brute.get(c).ok_or_else(|| {
            Error::Structure(format!("GA chromosome {c} is not on the brute-force grid"))
        })?;
        seen_ref.push(reference);
        seen_ga.push(v);
    }

    let k = k.min(ga.len());
    let predictor = KnnPredictor::new(ga, space, Metric::NormalizedEuclidean)?;
    let full: Vec<f64> = grid
        .par_iter()
        .map(|c| match ga.get(c) {
            Some(v) => Ok(v),
            None => predictor.predict(&space.decode(c)?, k),
        })
        .collect::<Result<_>>()?;
    let grid_ref: Vec<f64> = grid.iter().map(|c| brute.get(c).expect("covered")).collect();

    Ok(EvaluationReport {
        rmse_seen_only: rmse(&seen_ref, &seen_ga)?,
        rmse_full_grid: rmse(&grid_ref, &full)?,
        grid_size: grid.len(),
        ga_queries: ga.len(),
        query_ratio: ga.len() as f64 / grid.len() as f64,
        k,
        ga_mean_power: ga.mean_power(),
        grid_mean_power: brute.mean_power(),
    })
}

/// One row of a population/iteration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub population_size: usize,
    #[serde(rename = "I")]
    pub iterations: usize,
    pub oracle_queries: u64,
    pub query_ratio: f64,
    pub rmse_seen: f64,
    pub rmse_full: f64,
    pub elapsed_ms: u64,
}

pub const SWEEP_HEADER: &str = "N,I,oracle_queries,query_ratio,rmse_seen,rmse_full,elapsed_ms";

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{}",
            self.population_size,
            self.iterations,
            self.oracle_queries,
            self.query_ratio,
            self.rmse_seen,
            self.rmse_full,
            self.elapsed_ms
        )
    }
}
