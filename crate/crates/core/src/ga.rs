//! Genetic search over the parameter grid with a memoized power oracle.
//!
//! Each iteration evaluates the population (dictionary hit or oracle call),
//! appends new values to the dictionary, then reproduces with λ-logistic
//! (softmax) selection, mutates and performs a one-point crossover of the two
//! fittest members. The terminal population is evaluated as well, so every
//! chromosome the search generates ends up in the dictionary.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{MlrPowerOracle, OracleConfig, PowerOracle};
use crate::seed::ga_rng;
use crate::space::{Chromosome, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub lambda: f64,
    pub mutation_prob: f64,
    pub master_seed: u64,
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("ga.population_size", "must be >= 2"));
        }
        if self.iterations < 1 {
            return Err(Error::config("ga.iterations", "must be >= 1"));
        }
        if !self.lambda.is_finite() {
            return Err(Error::config("ga.lambda", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::config(
                "ga.mutation_prob",
                format!("must lie in [0, 1], got {}", self.mutation_prob),
            ));
        }
        Ok(())
    }
}

/// Insert-only map from chromosome to estimated power; the learned manifold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerDictionary {
    entries: BTreeMap<Chromosome, f64>,
}

impl PowerDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry. Existing keys are never overwritten; returns whether the
    /// key was new.
    pub fn insert(&mut self, chromosome: Chromosome, power: f64) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry(chromosome) {
            Entry::Vacant(v) => {
                v.insert(power);
                true
            }
            Entry::Occupied(_) => false,
        }
    }

    pub fn get(&self, chromosome: &Chromosome) -> Option<f64> {
        self.entries.get(chromosome).copied()
    }

    pub fn contains(&self, chromosome: &Chromosome) -> bool {
        self.entries.contains_key(chromosome)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic key order.
    pub fn iter(&self) -> impl Iterator<Item = (&Chromosome, f64)> {
        self.entries.iter().map(|(c, &v)| (c, v))
    }

    pub fn mean_power(&self) -> f64 {
        if self.entries.is_empty() {
            return f64::NAN;
        }
        self.entries.values().sum::<f64>() / self.entries.len() as f64
    }
}

impl FromIterator<(Chromosome, f64)> for PowerDictionary {
    fn from_iter<I: IntoIterator<Item = (Chromosome, f64)>>(iter: I) -> Self {
        let mut d = PowerDictionary::new();
        for (c, v) in iter {
            d.insert(c, v);
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub new_queries: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub dictionary_size: usize,
}

#[derive(Debug, Clone)]
pub struct GaReport {
    pub dictionary: PowerDictionary,
    pub oracle_queries: u64,
    /// One row per evaluation pass: `0..iterations` precede a reproduction
    /// cycle, the row numbered `iterations` is the terminal population.
    pub per_iteration: Vec<IterationStats>,
    pub elapsed: Duration,
}

pub fn initialize_population<R: Rng + ?Sized>(
    space: &SearchSpace,
    size: usize,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..size).map(|_| space.random_chromosome(rng)).collect()
}

/// Softmax of `lambda · fitness`, stabilized by subtracting the maximum.
pub fn selection_probabilities(fitness: &[f64], lambda: f64) -> Vec<f64> {
    if fitness.is_empty() {
        return Vec::new();
    }
    let scaled: Vec<f64> = fitness.iter().map(|f| lambda * f).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Draws `population.len()` members with replacement under softmax
/// selection. Returns the new population and the index each member was
/// copied from.
pub fn reproduce<R: Rng + ?Sized>(
    population: &[Chromosome],
    fitness: &[f64],
    lambda: f64,
    rng: &mut R,
) -> (Vec<Chromosome>, Vec<usize>) {
    assert_eq!(population.len(), fitness.len(), "population/fitness length mismatch");
    let probs = selection_probabilities(fitness, lambda);
    let dist = WeightedIndex::new(&probs).expect("softmax weights are finite and positive");
    let picks: Vec<usize> = (0..population.len()).map(|_| dist.sample(rng)).collect();
    let next = picks.iter().map(|&i| population[i].clone()).collect();
    (next, picks)
}

/// Each member is mutated with probability `p_m`: one uniformly chosen gene
/// is replaced by a uniform value from its dimension's grid. Returns the
/// positions that were mutated.
pub fn mutate<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    p_m: f64,
    space: &SearchSpace,
    rng: &mut R,
) -> Vec<usize> {
    let counts = space.grid_counts();
    let mut mutated = Vec::new();
    for (i, c) in population.iter_mut().enumerate() {
        if rng.random::<f64>() < p_m {
            let gene = rng.random_range(0..counts.len());
            c.genes_mut()[gene] = rng.random_range(0..counts[gene]) as u32;
            mutated.push(i);
        }
    }
    mutated
}

/// One-point crossover of the two fittest members. Offspring replace the two
/// least fit non-parent members; parents stay. Ties in fitness rank by
/// chromosome key. Populations of fewer than four members have fewer than
/// two replaceable slots; remaining offspring then overwrite the parents,
/// second parent first.
pub fn crossover_best_two<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    fitness: &[f64],
    rng: &mut R,
) {
    let n = population.len();
    assert!(n >= 2, "crossover needs at least two members");
    assert_eq!(n, fitness.len(), "population/fitness length mismatch");
    let genes = population[0].len();
    assert!(genes >= 2, "crossover needs at least two genes");

    let mut best: Vec<usize> = (0..n).collect();
    best.sort_by(|&a, &b| {
        fitness[b]
            .total_cmp(&fitness[a])
            .then_with(|| population[a].cmp(&population[b]))
            .then(a.cmp(&b))
    });
    let (first, second) = (best[0], best[1]);

    let split = rng.random_range(1..genes);
    let p1 = population[first].genes();
    let p2 = population[second].genes();
    let child1: Vec<u32> = p1[..split].iter().chain(&p2[split..]).copied().collect();
    let child2: Vec<u32> = p2[..split].iter().chain(&p1[split..]).copied().collect();

    let mut worst: Vec<usize> = (0..n).filter(|&i| i != first && i != second).collect();
    worst.sort_by(|&a, &b| {
        fitness[a]
            .total_cmp(&fitness[b])
            .then_with(|| population[b].cmp(&population[a]))
            .then(a.cmp(&b))
    });
    worst.truncate(2);
    worst.extend([second, first]);
    population[worst[0]] = Chromosome::new(child1);
    population[worst[1]] = Chromosome::new(child2);
}

/// Runs the search with the regression power oracle.
pub fn run(
    space: &SearchSpace,
    oracle: &OracleConfig,
    cfg: &GaConfig,
    workers: usize,
) -> Result<GaReport> {
    let oracle = MlrPowerOracle::new(space.clone(), oracle.clone(), cfg.master_seed)?;
    let report = run_with_oracle(space, &oracle, cfg, workers)?;
    debug_assert_eq!(report.oracle_queries, oracle.queries());
    Ok(report)
}

/// Runs the search against any oracle.
pub fn run_with_oracle<O: PowerOracle + ?Sized>(
    space: &SearchSpace,
    oracle: &O,
    cfg: &GaConfig,
    workers: usize,
) -> Result<GaReport> {
    cfg.validate()?;
    let pool = thread_pool(workers)?;
    let start = Instant::now();
    let mut rng = ga_rng(cfg.master_seed);
    let mut dictionary = PowerDictionary::new();
    let mut per_iteration = Vec::with_capacity(cfg.iterations + 1);
    let mut queries = 0u64;

    let mut population = initialize_population(space, cfg.population_size, &mut rng);
    for iteration in 0..=cfg.iterations {
        let new = evaluate_new(&population, &mut dictionary, oracle, &pool)?;
        queries += new;
        if queries != dictionary.len() as u64 {
            return Err(Error::Structure(format!(
                "memoization broken: {queries} oracle queries but {} dictionary entries",
                dictionary.len()
            )));
        }
        let fitness: Vec<f64> = population
            .iter()
            .map(|c| dictionary.get(c).expect("evaluated above"))
            .collect();
        per_iteration.push(IterationStats {
            iteration,
            new_queries: new,
            best_fitness: fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
            dictionary_size: dictionary.len(),
        });
        if iteration == cfg.iterations {
            break;
        }

        let (mut next, picks) = reproduce(&population, &fitness, cfg.lambda, &mut rng);
        mutate(&mut next, cfg.mutation_prob, space, &mut rng);
        // Fresh mutants have no value yet; they carry the fitness of the
        // member they were copied from.
        let carried: Vec<f64> = next
            .iter()
            .zip(&picks)
            .map(|(c, &src)| dictionary.get(c).unwrap_or(fitness[src]))
            .collect();
        crossover_best_two(&mut next, &carried, &mut rng);
        population = next;
    }

    Ok(GaReport {
        dictionary,
        oracle_queries: queries,
        per_iteration,
        elapsed: start.elapsed(),
    })
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::config("workers", "must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))
}

/// Evaluates chromosomes that are not yet in the dictionary, in parallel, and
/// inserts them in first-appearance order. Returns the number of oracle calls.
pub(crate) fn evaluate_new<'a, O, I>(
    chromosomes: I,
    dictionary: &mut PowerDictionary,
    oracle: &O,
    pool: &rayon::ThreadPool,
) -> Result<u64>
where
    O: PowerOracle + ?Sized,
    I: IntoIterator<Item = &'a Chromosome>,
{
    let mut seen = HashSet::new();
    let fresh: Vec<&Chromosome> = chromosomes
        .into_iter()
        .filter(|c| !dictionary.contains(c) && seen.insert(*c))
        .collect();
    let values: Vec<Result<f64>> = pool.install(|| fresh.par_iter().map(|c| oracle.power(c)).collect());
    for (c, value) in fresh.iter().zip(values) {
        let value = value.map_err(|e| match e {
            e @ Error::Oracle { .. } => e,
            other => Error::Oracle {
                chromosome: c.genes().iter().map(|&g| g as usize).collect(),
                source: Box::new(other),
            },
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Oracle {
                chromosome: c.genes().iter().map(|&g| g as usize).collect(),
                source: Box::new(Error::domain("oracle", format!("power {value} outside [0, 1]"))),
            });
        }
        dictionary.insert((*c).clone(), value);
    }
    Ok(fresh.len() as u64)
}
