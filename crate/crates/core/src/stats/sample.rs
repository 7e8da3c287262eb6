use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ols::Matrix;
use crate::error::{Error, Result};

/// How regressors are drawn for simulated data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorScheme {
    /// Every regressor iid standard normal.
    #[default]
    Normal,
    /// Treatment design with interaction, p = 3 only: x₁ balanced in {−1, +1},
    /// x₂ standard normal, x₃ = x₁·x₂.
    Experiment,
}

impl RegressorScheme {
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            RegressorScheme::Normal => Ok(()),
            RegressorScheme::Experiment if p == 3 => Ok(()),
            RegressorScheme::Experiment => Err(Error::config(
                "oracle.scheme",
                format!("experiment scheme needs exactly 3 coefficients, space has {p}"),
            )),
        }
    }
}

/// Simulates `y = Xβ + ε` with zero intercept and `ε ~ N(0, σ²)`.
///
/// The returned design has the intercept column prepended, ready for fitting.
pub fn generate_mlr_sample<R: Rng + ?Sized>(
    beta: &[f64],
    n: usize,
    sigma2: f64,
    scheme: RegressorScheme,
    rng: &mut R,
) -> Result<(Matrix, Vec<f64>)> {
    let p = beta.len();
    scheme.validate(p)?;
    if n < p + 2 {
        return Err(Error::domain(
            "sample",
            format!("n={n} too small for {p} slopes plus intercept"),
        ));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::domain("sample", format!("sigma2 must be finite and >= 0, got {sigma2}")));
    }

    let mut x = Matrix::zeros(n, p + 1);
    x.column_mut(0).fill(1.0);
    match scheme {
        RegressorScheme::Normal => {
            for j in 1..=p {
                for v in x.column_mut(j) {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
        RegressorScheme::Experiment => {
            let treated = n.div_ceil(2);
            let x1 = x.column_mut(1);
            for (i, v) in x1.iter_mut().enumerate() {
                *v = if i < treated { 1.0 } else { -1.0 };
            }
            x1.shuffle(rng);
            for v in x.column_mut(2) {
                *v = rng.sample(StandardNormal);
            }
            for i in 0..n {
                let prod = x.get(i, 1) * x.get(i, 2);
                x.set(i, 3, prod);
            }
        }
    }

    let sigma = sigma2.sqrt();
    let mut y = vec![0.0; n];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x.column(j + 1)) {
                *yi += b * xi;
            }
        }
    }
    for yi in &mut y {
        let e: f64 = rng.sample(StandardNormal);
        *yi += sigma * e;
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_sample_is_first_regressor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = generate_mlr_sample(&[1.0, 0.0, 0.0], 50, 0.0, RegressorScheme::Normal, &mut rng).unwrap();
        assert_eq!(x.cols(), 4);
        assert!(x.column(0).iter().all(|&v| v == 1.0));
        for (yi, xi) in y.iter().zip(x.column(1)) {
            assert!((yi - xi).abs() < 1e-15);
        }
    }

    #[test]
    fn regressor_means_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let (x, _) = generate_mlr_sample(&[0.2, 0.2], n, 1.0, RegressorScheme::Normal, &mut rng).unwrap();
        for j in 1..=2 {
            let mean = x.column(j).iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.02, "column {j} mean {mean}");
        }
    }

    #[test]
    fn experiment_scheme_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, _) = generate_mlr_sample(&[0.1, 0.5, 0.2], 101, 1.0, RegressorScheme::Experiment, &mut rng).unwrap();
        let x1 = x.column(1);
        assert!(x1.iter().all(|&v| v == 1.0 || v == -1.0));
        assert_eq!(x1.iter().filter(|&&v| v == 1.0).count(), 51);
        for i in 0..101 {
            assert_eq!(x.get(i, 3), x.get(i, 1) * x.get(i, 2));
        }
    }

    #[test]
    fn experiment_scheme_needs_three_slopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(generate_mlr_sample(&[0.1, 0.2], 20, 1.0, RegressorScheme::Experiment, &mut rng).is_err());
    }

    #[test]
    fn too_few_observations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(generate_mlr_sample(&[0.1, 0.2], 3, 1.0, RegressorScheme::Normal, &mut rng).is_err());
    }
}
