//! Learning statistical power manifolds with a genetic algorithm.
//!
//! The crate evaluates power by Monte-Carlo simulation of a multiple linear
//! regression test ([`oracle`]), searches a discretized `(θ, n)` grid with a
//! memoizing genetic algorithm ([`ga`]), predicts unseen points with k nearest
//! neighbors ([`knn`]) and compares the result with an exhaustive grid
//! evaluation ([`baseline`]).

pub mod baseline;
pub mod error;
pub mod export;
pub mod ga;
pub mod knn;
pub mod oracle;
pub mod seed;
pub mod space;
pub mod stats;

pub use baseline::{brute_force_manifold, evaluate, rmse, EvaluationReport, SweepRow};
pub use error::{Error, Result};
pub use ga::{GaConfig, GaReport, IterationStats, PowerDictionary};
pub use knn::{KnnPredictor, Metric, NeighborQuery};
pub use oracle::{estimate_power, MlrPowerOracle, OracleConfig, PowerOracle, QueryCounter};
pub use space::{Chromosome, ParameterRange, SearchSpace};
pub use stats::{RegressorScheme, TestKind, TestSpec};
