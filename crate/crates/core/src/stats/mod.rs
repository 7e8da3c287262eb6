//! Numerical statistics used by the power oracle: special functions,
//! least squares, t/F tests and simulated regression data.

mod hypothesis;
mod ols;
mod sample;
mod special;

pub use hypothesis::{fit_and_test, run_test, TestKind, TestResult, TestSpec};
pub use ols::{ols_fit, ols_sse, Matrix, OlsFit};
pub use sample::{generate_mlr_sample, RegressorScheme};
pub use special::{
    f_cdf, f_sf, ln_gamma, regularized_incomplete_beta, student_t_cdf, student_t_two_sided,
};
