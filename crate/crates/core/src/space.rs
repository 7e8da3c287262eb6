//! Discretized parameter domain and the chromosome encoding.
//!
//! A chromosome stores one integer grid index per dimension: the regression
//! coefficients θ₁..θ_p first, the sample size n last. Keys are therefore exact
//! and never depend on floating-point decoding.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when counting grid points and snapping, so that ranges such as
/// `[0.10, 0.30]` with step `0.05` keep their top point despite rounding.
const GRID_EPS: f64 = 1e-9;

/// Smallest sample size ever decoded.
pub const MIN_SAMPLE_SIZE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterRange {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl ParameterRange {
    pub fn new(lower: f64, upper: f64, step: f64) -> Result<Self> {
        let range = ParameterRange { lower, upper, step };
        range.validate("range")?;
        Ok(range)
    }

    /// Single-point range, handy for pinning a coefficient.
    pub fn fixed(value: f64) -> Self {
        ParameterRange {
            lower: value,
            upper: value,
            step: 1.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.step.is_finite()) {
            return Err(Error::config(field, "bounds and step must be finite"));
        }
        if self.step <= 0.0 {
            return Err(Error::config(
                format!("{field}.step"),
                format!("step must be > 0, got {}", self.step),
            ));
        }
        if self.lower > self.upper {
            return Err(Error::config(
                field,
                format!("lower {} exceeds upper {}", self.lower, self.upper),
            ));
        }
        Ok(())
    }

    /// Number of grid points: `floor((upper - lower) / step) + 1`.
    pub fn grid_count(&self) -> usize {
        ((self.upper - self.lower) / self.step + GRID_EPS).floor() as usize + 1
    }

    /// Largest reachable grid value; may sit below `upper` when the span is
    /// not a multiple of the step.
    pub fn top(&self) -> f64 {
        self.value_at(self.grid_count() - 1)
    }

    pub fn value_at(&self, index: usize) -> f64 {
        self.lower + index as f64 * self.step
    }

    /// Nearest grid index; an exact midpoint goes to the lower index.
    fn snap(&self, value: f64) -> Option<usize> {
        let half = self.step / 2.0;
        if !value.is_finite()
            || value < self.lower - half - GRID_EPS
            || value > self.upper + half + GRID_EPS
        {
            return None;
        }
        let t = (value - self.lower) / self.step;
        let index = (t - 0.5 - GRID_EPS).ceil().max(0.0) as usize;
        Some(index.min(self.grid_count() - 1))
    }

    fn is_integral(&self) -> bool {
        [self.lower, self.upper, self.step]
            .iter()
            .all(|v| (v - v.round()).abs() < GRID_EPS)
    }
}

/// Grid coordinates of one candidate `(θ₁, …, θ_p, n)`.
///
/// Ordering is lexicographic over the indices, which is also the order used
/// for tie-breaking everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome(Vec<u32>);

impl Chromosome {
    pub fn new(genes: Vec<u32>) -> Self {
        Chromosome(genes)
    }

    pub fn genes(&self) -> &[u32] {
        &self.0
    }

    pub fn genes_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_genes(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ")")
    }
}

/// The coefficient ranges plus the integer sample-size range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSearchSpace")]
pub struct SearchSpace {
    coefficients: Vec<ParameterRange>,
    sample_size: ParameterRange,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearchSpace {
    coefficients: Vec<ParameterRange>,
    sample_size: ParameterRange,
}

impl TryFrom<RawSearchSpace> for SearchSpace {
    type Error = Error;

    fn try_from(raw: RawSearchSpace) -> Result<Self> {
        SearchSpace::new(raw.coefficients, raw.sample_size)
    }
}

impl SearchSpace {
    pub fn new(coefficients: Vec<ParameterRange>, sample_size: ParameterRange) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::config(
                "space.coefficients",
                "at least one coefficient range is required",
            ));
        }
        for (j, range) in coefficients.iter().enumerate() {
            range.validate(&format!("space.coefficients[{j}]"))?;
        }
        sample_size.validate("space.sample_size")?;
        if !sample_size.is_integral() || sample_size.lower < 1.0 {
            return Err(Error::config(
                "space.sample_size",
                "lower, upper and step must be positive integers",
            ));
        }
        let p = coefficients.len() as u64;
        let smallest_n = (sample_size.lower.round() as u64).max(MIN_SAMPLE_SIZE);
        if smallest_n < p + 2 {
            return Err(Error::config(
                "space.sample_size.lower",
                format!("smallest sample size {smallest_n} leaves no residual degrees of freedom for {p} coefficients (need n >= {})", p + 2),
            ));
        }
        Ok(SearchSpace {
            coefficients,
            sample_size,
        })
    }

    pub fn coefficient_ranges(&self) -> &[ParameterRange] {
        &self.coefficients
    }

    pub fn sample_size_range(&self) -> &ParameterRange {
        &self.sample_size
    }

    /// Number of regression slopes `p`.
    pub fn num_coefficients(&self) -> usize {
        self.coefficients.len()
    }

    /// Chromosome length `L = p + 1`.
    pub fn dims(&self) -> usize {
        self.coefficients.len() + 1
    }

    pub fn range(&self, dim: usize) -> &ParameterRange {
        if dim < self.coefficients.len() {
            &self.coefficients[dim]
        } else {
            &self.sample_size
        }
    }

    pub fn ranges(&self) -> impl Iterator<Item = &ParameterRange> {
        self.coefficients.iter().chain(std::iter::once(&self.sample_size))
    }

    pub fn grid_counts(&self) -> Vec<usize> {
        self.ranges().map(ParameterRange::grid_count).collect()
    }

    /// Total number of grid points, saturating rather than overflowing.
    pub fn grid_size(&self) -> u128 {
        self.ranges()
            .map(|r| r.grid_count() as u128)
            .fold(1u128, |acc, c| acc.saturating_mul(c))
    }

    pub fn check(&self, c: &Chromosome) -> Result<()> {
        if c.len() != self.dims() {
            return Err(Error::domain(
                "chromosome",
                format!("has {} genes, space has {} dimensions", c.len(), self.dims()),
            ));
        }
        for (dim, (&g, range)) in c.genes().iter().zip(self.ranges()).enumerate() {
            if g as usize >= range.grid_count() {
                return Err(Error::domain(
                    self.dim_name(dim),
                    format!("index {g} out of range 0..{}", range.grid_count()),
                ));
            }
        }
        Ok(())
    }

    pub fn dim_name(&self, dim: usize) -> String {
        if dim < self.coefficients.len() {
            format!("theta_{}", dim + 1)
        } else {
            "n".to_string()
        }
    }

    /// Real coordinates `(θ₁, …, θ_p, n)`. The sample size is an exact
    /// integer, clamped to at least [`MIN_SAMPLE_SIZE`].
    pub fn decode(&self, c: &Chromosome) -> Result<Vec<f64>> {
        self.check(c)?;
        Ok(self.decode_unchecked(c))
    }

    pub(crate) fn decode_unchecked(&self, c: &Chromosome) -> Vec<f64> {
        let p = self.coefficients.len();
        let mut out: Vec<f64> = c.genes()[..p]
            .iter()
            .zip(&self.coefficients)
            .map(|(&g, r)| r.value_at(g as usize))
            .collect();
        out.push(self.sample_size_at(c.genes()[p]) as f64);
        out
    }

    /// Coefficients and integer sample size of a valid chromosome.
    pub fn decode_parts(&self, c: &Chromosome) -> Result<(Vec<f64>, usize)> {
        self.check(c)?;
        let p = self.coefficients.len();
        let beta = c.genes()[..p]
            .iter()
            .zip(&self.coefficients)
            .map(|(&g, r)| r.value_at(g as usize))
            .collect();
        Ok((beta, self.sample_size_at(c.genes()[p]) as usize))
    }

    fn sample_size_at(&self, index: u32) -> u64 {
        (self.sample_size.value_at(index as usize).round() as u64).max(MIN_SAMPLE_SIZE)
    }

    /// Nearest grid point per dimension.
    pub fn snap(&self, values: &[f64]) -> Result<Chromosome> {
        if values.len() != self.dims() {
            return Err(Error::domain(
                "point",
                format!("has {} values, space has {} dimensions", values.len(), self.dims()),
            ));
        }
        let genes = values
            .iter()
            .zip(self.ranges())
            .enumerate()
            .map(|(dim, (&v, range))| {
                range.snap(v).map(|i| i as u32).ok_or_else(|| {
                    Error::domain(
                        self.dim_name(dim),
                        format!(
                            "value {v} outside [{}, {}] by more than half a step",
                            range.lower, range.upper
                        ),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chromosome(genes))
    }

    /// Uniform random grid point, dimensions independent.
    pub fn random_chromosome<R: Rng + ?Sized>(&self, rng: &mut R) -> Chromosome {
        Chromosome(
            self.ranges()
                .map(|r| rng.random_range(0..r.grid_count()) as u32)
                .collect(),
        )
    }

    /// All grid points in lexicographic index order (last dimension fastest).
    pub fn enumerate_grid(&self) -> GridIter {
        GridIter {
            counts: self.grid_counts(),
            next: Some(vec![0; self.dims()]),
        }
    }
}

/// Odometer over the grid; see [`SearchSpace::enumerate_grid`].
#[derive(Debug, Clone)]
pub struct GridIter {
    counts: Vec<usize>,
    next: Option<Vec<u32>>,
}

impl Iterator for GridIter {
    type Item = Chromosome;

    fn next(&mut self) -> Option<Chromosome> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut dim = succ.len();
        loop {
            if dim == 0 {
                break;
            }
            dim -= 1;
            succ[dim] += 1;
            if (succ[dim] as usize) < self.counts[dim] {
                self.next = Some(succ);
                break;
            }
            succ[dim] = 0;
        }
        Some(Chromosome(current))
    }
}
