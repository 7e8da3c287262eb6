use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, ols_sse, Matrix, OlsFit};
use super::special::{f_sf, student_t_two_sided};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Two-sided t-test of one slope, controlling for the others.
    TSingle,
    /// Partial F-test of `H₀: β_{i₁} = … = β_{i_k} = 0`.
    FJoint,
}

/// Which slopes are tested and how. Indices are 1-based slope numbers, so
/// index `j` refers to θ_j (coefficient `j` of the fit, after the intercept).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSpec {
    pub kind: TestKind,
    pub indices: Vec<usize>,
}

impl TestSpec {
    pub fn t_single(index: usize) -> Self {
        TestSpec {
            kind: TestKind::TSingle,
            indices: vec![index],
        }
    }

    pub fn f_joint(indices: Vec<usize>) -> Self {
        let mut indices = indices;
        indices.sort_unstable();
        indices.dedup();
        TestSpec {
            kind: TestKind::FJoint,
            indices,
        }
    }

    /// Overall-regression F-test over all `p` slopes.
    pub fn overall(p: usize) -> Self {
        Self::f_joint((1..=p).collect())
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::config("oracle.test.indices", "must not be empty"));
        }
        if self.kind == TestKind::TSingle && self.indices.len() != 1 {
            return Err(Error::config(
                "oracle.test.indices",
                format!("t_single takes exactly one index, got {}", self.indices.len()),
            ));
        }
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "oracle.test.indices",
                "indices must be strictly increasing",
            ));
        }
        if let Some(&bad) = self.indices.iter().find(|&&i| i == 0 || i > p) {
            return Err(Error::config(
                "oracle.test.indices",
                format!("slope index {bad} outside 1..={p}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            reject: p_value < alpha,
        }
    }
}

/// Runs the test described by `spec` on a full-model fit. `restricted_sse` is
/// the SSE of the model without the tested slopes (intercept kept); it is
/// required for `FJoint` and ignored for `TSingle`.
pub fn run_test(
    fit: &OlsFit,
    spec: &TestSpec,
    alpha: f64,
    restricted_sse: Option<f64>,
) -> Result<TestResult> {
    let p = fit.coefficients.len() - 1;
    spec.validate(p)?;
    match spec.kind {
        TestKind::TSingle => {
            let i = spec.indices[0];
            let se = fit.standard_error(i);
            if !(se > 0.0 && se.is_finite()) {
                return Err(Error::DegenerateFit(format!(
                    "standard error of slope {i} is {se}"
                )));
            }
            let t = fit.coefficients[i] / se;
            let p_value = student_t_two_sided(t, fit.residual_df)?;
            Ok(TestResult::new(t, p_value, alpha))
        }
        TestKind::FJoint => {
            let sse_r = restricted_sse.ok_or_else(|| {
                Error::domain("f_joint test", "restricted model SSE is required")
            })?;
            if !(fit.sse > 0.0 && fit.sse.is_finite()) {
                return Err(Error::DegenerateFit(format!(
                    "full-model SSE is {}",
                    fit.sse
                )));
            }
            let k = spec.indices.len() as f64;
            let df = fit.residual_df as f64;
            let f = (((sse_r - fit.sse) / k) / (fit.sse / df)).max(0.0);
            let p_value = f_sf(f, spec.indices.len() as u64, fit.residual_df)?;
            Ok(TestResult::new(f, p_value, alpha))
        }
    }
}

/// Fits the full model (and the restricted one for F-tests) and runs the test.
/// `x` must carry the intercept in column 0.
pub fn fit_and_test(x: &Matrix, y: &[f64], spec: &TestSpec, alpha: f64) -> Result<TestResult> {
    let fit = ols_fit(x, y)?;
    let restricted = match spec.kind {
        TestKind::TSingle => None,
        TestKind::FJoint => {
            let keep: Vec<usize> = (0..x.cols())
                .filter(|c| !spec.indices.contains(c))
                .collect();
            Some(ols_sse(&x.select_columns(&keep), y)?)
        }
    };
    run_test(&fit, spec, alpha, restricted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<f64>) {
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.71).sin()).collect();
        let x2: Vec<f64> = (0..n).map(|i| (i as f64 * 0.23).cos()).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.4 * x1[i] + 0.1 * x2[i] + (i as f64 * 2.9).sin())
            .collect();
        (Matrix::from_columns(&[vec![1.0; n], x1, x2]).unwrap(), y)
    }

    #[test]
    fn spec_validation() {
        assert!(TestSpec::t_single(1).validate(3).is_ok());
        assert!(TestSpec::t_single(0).validate(3).is_err());
        assert!(TestSpec::t_single(4).validate(3).is_err());
        assert!(TestSpec::f_joint(vec![]).validate(3).is_err());
        let bad = TestSpec {
            kind: TestKind::TSingle,
            indices: vec![1, 2],
        };
        assert!(bad.validate(3).is_err());
        assert_eq!(TestSpec::f_joint(vec![3, 1, 3]).indices, vec![1, 3]);
        assert_eq!(TestSpec::overall(3).indices, vec![1, 2, 3]);
    }

    #[test]
    fn zero_estimate_never_rejects() {
        let (x, y) = toy();
        let mut fit = ols_fit(&x, &y).unwrap();
        fit.coefficients[1] = 0.0;
        let r = run_test(&fit, &TestSpec::t_single(1), 0.05, None).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
    }

    #[test]
    fn single_index_f_equals_t_squared() {
        let (x, y) = toy();
        for i in [1, 2] {
            let t = fit_and_test(&x, &y, &TestSpec::t_single(i), 0.05).unwrap();
            let f = fit_and_test(&x, &y, &TestSpec::f_joint(vec![i]), 0.05).unwrap();
            assert!((f.statistic - t.statistic * t.statistic).abs() < 1e-9 * f.statistic.max(1.0));
            assert!((f.p_value - t.p_value).abs() < 1e-9);
            assert_eq!(f.reject, t.reject);
        }
    }

    #[test]
    fn reject_is_strict() {
        let (x, y) = toy();
        let r = fit_and_test(&x, &y, &TestSpec::t_single(1), 0.05).unwrap();
        let at_p = fit_and_test(&x, &y, &TestSpec::t_single(1), r.p_value).unwrap();
        assert!(!at_p.reject);
    }

    #[test]
    fn f_requires_restricted_sse() {
        let (x, y) = toy();
        let fit = ols_fit(&x, &y).unwrap();
        assert!(run_test(&fit, &TestSpec::overall(2), 0.05, None).is_err());
    }

    #[test]
    fn zero_standard_error_is_degenerate() {
        let (x, y) = toy();
        let mut fit = ols_fit(&x, &y).unwrap();
        fit.coefficient_covariance[2][2] = 0.0;
        let err = run_test(&fit, &TestSpec::t_single(2), 0.05, None).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
    }
}
