//! Ordinary least squares through a Householder QR decomposition.

use crate::error::{Error, Result};

/// Relative pivot threshold for the rank check.
const RANK_TOL: f64 = 1e-10;

/// Dense column-major matrix, just large enough for design matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from its columns; all columns must share a length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::domain("matrix", "columns have different lengths"));
        }
        Ok(Matrix {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// Copy keeping only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * keep.len());
        for &c in keep {
            data.extend_from_slice(self.column(c));
        }
        Matrix {
            rows: self.rows,
            cols: keep.len(),
            data,
        }
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (c, &w) in v.iter().enumerate().take(self.cols) {
            for (o, x) in out.iter_mut().zip(self.column(c)) {
                *o += w * x;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept first, then the slopes.
    pub coefficients: Vec<f64>,
    /// σ̂² = SSE / residual_df.
    pub residual_variance: f64,
    /// σ̂² (XᵀX)⁻¹, row-major `cols × cols`.
    pub coefficient_covariance: Vec<Vec<f64>>,
    pub residual_df: u64,
    pub sse: f64,
}

impl OlsFit {
    pub fn standard_error(&self, coefficient: usize) -> f64 {
        self.coefficient_covariance[coefficient][coefficient].sqrt()
    }
}

/// Least-squares fit of `y` on the columns of `x` (which should already
/// contain the intercept column).
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let n = x.rows();
    let k = x.cols();
    if y.len() != n {
        return Err(Error::domain(
            "ols",
            format!("design has {n} rows but response has {} entries", y.len()),
        ));
    }
    if k == 0 || n < k + 1 {
        return Err(Error::domain(
            "ols",
            format!("need more observations than columns (n={n}, columns={k})"),
        ));
    }
    let (r, qty) = householder_r(x, y)?;
    let coefficients = back_substitute(&r, &qty[..k], k);

    let fitted = x.mul_vec(&coefficients);
    let sse: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let residual_df = (n - k) as u64;
    let residual_variance = sse / residual_df as f64;

    let r_inv = invert_upper(&r, k);
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            // (R⁻¹ R⁻ᵀ)_{ij} = Σ_l R⁻¹_{il} R⁻¹_{jl}, with R⁻¹ upper triangular
            let s: f64 = (j..k).map(|l| r_inv[i * k + l] * r_inv[j * k + l]).sum();
            cov[i][j] = s * residual_variance;
            cov[j][i] = cov[i][j];
        }
    }

    Ok(OlsFit {
        coefficients,
        residual_variance,
        coefficient_covariance: cov,
        residual_df,
        sse,
    })
}

/// Error sum of squares only; used for restricted models.
pub fn ols_sse(x: &Matrix, y: &[f64]) -> Result<f64> {
    let k = x.cols();
    let (r, qty) = householder_r(x, y)?;
    let coefficients = back_substitute(&r, &qty[..k], k);
    let fitted = x.mul_vec(&coefficients);
    Ok(y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Returns the `k × k` upper factor R (row-major) and Qᵀy.
fn householder_r(x: &Matrix, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.rows();
    let k = x.cols();
    let norms: Vec<f64> = (0..k).map(|c| norm(x.column(c))).collect();
    let mut a = x.clone();
    let mut qty = y.to_vec();
    let mut v = vec![0.0; n];

    for j in 0..k {
        let col = &a.column(j)[j..];
        let alpha_norm = norm(col);
        if norms[j] == 0.0 || alpha_norm < RANK_TOL * norms[j] {
            return Err(Error::SingularDesign { column: j });
        }
        let alpha = if col[0] > 0.0 { -alpha_norm } else { alpha_norm };
        let v = &mut v[..n - j];
        v.copy_from_slice(col);
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|e| e * e).sum();
        if vtv > 0.0 {
            for c in j..k {
                reflect(&mut a.column_mut(c)[j..], v, vtv);
            }
            reflect(&mut qty[j..], v, vtv);
        }
    }

    let mut r = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            r[i * k + j] = a.get(i, j);
        }
    }
    Ok((r, qty))
}

fn reflect(target: &mut [f64], v: &[f64], vtv: f64) {
    let dot: f64 = target.iter().zip(v).map(|(t, e)| t * e).sum();
    let scale = 2.0 * dot / vtv;
    for (t, e) in target.iter_mut().zip(v) {
        *t -= scale * e;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|e| e * e).sum::<f64>().sqrt()
}

fn back_substitute(r: &[f64], rhs: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| r[i * k + j] * out[j]).sum();
        out[i] = (rhs[i] - s) / r[i * k + i];
    }
    out
}

fn invert_upper(r: &[f64], k: usize) -> Vec<f64> {
    let mut inv = vec![0.0; k * k];
    for col in 0..k {
        for i in (0..=col).rev() {
            let target = if i == col { 1.0 } else { 0.0 };
            let s: f64 = ((i + 1)..=col).map(|j| r[i * k + j] * inv[j * k + col]).sum();
            inv[i * k + col] = (target - s) / r[i * k + i];
        }
    }
    inv
}
