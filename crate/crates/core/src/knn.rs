//! k-nearest-neighbor power prediction over a learned dictionary.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::PowerDictionary;
use crate::space::{Chromosome, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Euclidean distance after mapping every dimension's grid span to [0, 1].
    #[default]
    NormalizedEuclidean,
    /// Euclidean distance on the decoded values.
    RawEuclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQuery {
    /// `(θ₁, …, θ_p, n)`; need not lie on the grid.
    pub point: Vec<f64>,
    pub k: usize,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub chromosome: Chromosome,
    pub power: f64,
    pub distance: f64,
}

/// A dictionary frozen for querying, with coordinates precomputed.
#[derive(Debug, Clone)]
pub struct KnnPredictor {
    metric: Metric,
    offsets: Vec<f64>,
    scales: Vec<f64>,
    keys: Vec<Chromosome>,
    powers: Vec<f64>,
    coords: Vec<Vec<f64>>,
}

impl KnnPredictor {
    pub fn new(dictionary: &PowerDictionary, space: &SearchSpace, metric: Metric) -> Result<Self> {
        let (offsets, scales) = match metric {
            Metric::NormalizedEuclidean => space
                .ranges()
                .map(|r| {
                    let span = r.top() - r.lower;
                    (r.lower, if span > 0.0 { 1.0 / span } else { 0.0 })
                })
                .unzip(),
            Metric::RawEuclidean => (vec![0.0; space.dims()], vec![1.0; space.dims()]),
        };
        let mut predictor = KnnPredictor {
            metric,
            offsets,
            scales,
            keys: Vec::with_capacity(dictionary.len()),
            powers: Vec::with_capacity(dictionary.len()),
            coords: Vec::with_capacity(dictionary.len()),
        };
        for (c, power) in dictionary.iter() {
            let decoded = space.decode(c)?;
            predictor.coords.push(predictor.transform(&decoded));
            predictor.keys.push(c.clone());
            predictor.powers.push(power);
        }
        Ok(predictor)
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    fn transform(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.offsets.iter().zip(&self.scales))
            .map(|(v, (o, s))| (v - o) * s)
            .collect()
    }

    /// The `k` closest entries, nearest first; equal distances rank by key.
    pub fn k_nearest(&self, point: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::domain("knn query", "k must be >= 1"));
        }
        if k > self.keys.len() {
            return Err(Error::domain(
                "knn query",
                format!("k={k} exceeds dictionary size {}", self.keys.len()),
            ));
        }
        if point.len() != self.offsets.len() {
            return Err(Error::domain(
                "knn query",
                format!("point has {} values, expected {}", point.len(), self.offsets.len()),
            ));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("knn query", "point has non-finite values"));
        }
        let q = self.transform(point);
        let mut scored: Vec<(f64, usize)> = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let d2: f64 = x.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2.sqrt(), i)
            })
            .collect();
        // keys are stored in ascending order, so the index breaks ties by key
        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(distance, i)| Neighbor {
                chromosome: self.keys[i].clone(),
                power: self.powers[i],
                distance,
            })
            .collect())
    }

    /// Unweighted mean power of the `k` nearest entries.
    pub fn predict(&self, point: &[f64], k: usize) -> Result<f64> {
        let neighbors = self.k_nearest(point, k)?;
        Ok(neighbors.iter().map(|n| n.power).sum::<f64>() / k as f64)
    }
}

pub fn k_nearest(
    dictionary: &PowerDictionary,
    space: &SearchSpace,
    query: &NeighborQuery,
) -> Result<Vec<Neighbor>> {
    KnnPredictor::new(dictionary, space, query.metric)?.k_nearest(&query.point, query.k)
}

pub fn predict_power(
    dictionary: &PowerDictionary,
    space: &SearchSpace,
    query: &NeighborQuery,
) -> Result<f64> {
    KnnPredictor::new(dictionary, space, query.metric)?.predict(&query.point, query.k)
}
