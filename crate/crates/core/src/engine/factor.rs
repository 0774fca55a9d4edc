//! Cholesky factors of increment covariances.
//!
//! Two routes produce the same lower factor `L` with `Sigma = L L^T`:
//! a dense row-by-row factorization for arbitrary grids, and a generator
//! (Schur) recursion in `O(k^2)` for the Toeplitz covariances of uniform grids.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// A pivot (residual variance) at or below `PIVOT_FLOOR * max_j Sigma[j][j]`
/// aborts the factorization.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Lower-triangular `L` with strictly positive diagonal and `L L^T = Sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    lower: Matrix,
}

impl TriangularFactor {
    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.lower.diagonal()
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, |i, j| {
            let m = i.min(j) + 1;
            dot(&self.lower.row(i)[..m], &self.lower.row(j)[..m])
        })
    }

    /// Writes `L z` into `out`.
    pub fn apply_into(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.lower.row(i)[..=i], &z[..=i]);
        }
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(z, &mut out);
        out
    }
}

/// Cholesky factorization grown one row at a time.
///
/// Row `j` only needs `Sigma[j][0..=j]` and the rows already stored, so a
/// factor for the first `j` increments is available before later rows exist.
#[derive(Debug, Clone)]
pub struct IncrementalCholesky {
    rows: Vec<Vec<f64>>,
    floor_scale: f64,
}

impl IncrementalCholesky {
    /// `diag_scale` sets the pivot floor (`PIVOT_FLOOR * diag_scale`), normally
    /// the largest diagonal entry of the full covariance.
    pub fn new(diag_scale: f64) -> Self {
        Self {
            rows: Vec::new(),
            floor_scale: diag_scale,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends row `j = self.len()` given `cov_row = Sigma[j][0..=j]`.
    pub fn push_row(&mut self, cov_row: &[f64]) -> Result<()> {
        let j = self.rows.len();
        if cov_row.len() != j + 1 {
            return Err(Error::ShapeMismatch {
                expected: j + 1,
                actual: cov_row.len(),
            });
        }
        let mut row = vec![0.0; j + 1];
        for i in 0..j {
            let prev = &self.rows[i];
            row[i] = (cov_row[i] - dot(&row[..i], &prev[..i])) / prev[i];
        }
        let pivot = cov_row[j] - dot(&row[..j], &row[..j]);
        if !(pivot > PIVOT_FLOOR * self.floor_scale) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        row[j] = pivot.sqrt();
        self.rows.push(row);
        Ok(())
    }

    pub fn finish(self) -> TriangularFactor {
        let n = self.rows.len();
        let mut lower = Matrix::zeros(n);
        for (i, row) in self.rows.into_iter().enumerate() {
            lower.row_mut(i)[..=i].copy_from_slice(&row);
        }
        TriangularFactor { lower }
    }
}

fn max_diagonal(cov: &Matrix) -> f64 {
    cov.diagonal().into_iter().fold(0.0, f64::max)
}

/// Dense Cholesky factorization reading the lower triangle of `cov`.
pub fn factorize(cov: &Matrix) -> Result<TriangularFactor> {
    factorize_with_ridge(cov, None)
}

/// As [`factorize`], factoring `cov + ridge * I` when a ridge is given.
pub fn factorize_with_ridge(cov: &Matrix, ridge: Option<f64>) -> Result<TriangularFactor> {
    let ridge = ridge.unwrap_or(0.0);
    let mut chol = IncrementalCholesky::new(max_diagonal(cov) + ridge);
    let mut buf = Vec::with_capacity(cov.dim());
    for j in 0..cov.dim() {
        buf.clear();
        buf.extend_from_slice(&cov.row(j)[..=j]);
        buf[j] += ridge;
        chol.push_row(&buf)?;
    }
    Ok(chol.finish())
}

/// Cholesky factor of the symmetric Toeplitz matrix with first column `gamma`,
/// by the Schur generator recursion.
///
/// The displacement `T - Z T Z^T` equals `g g^T - h h^T` with
/// `g = gamma / sqrt(gamma_0)` and `h = (0, gamma_1, ...) / sqrt(gamma_0)`.
/// Each stage emits `g` as a column of `L`, shifts it down, and applies the
/// hyperbolic rotation that annihilates the next entry of `h`.
pub fn factorize_toeplitz(gamma: &[f64]) -> Result<TriangularFactor> {
    let n = gamma.len();
    if n == 0 {
        return Ok(TriangularFactor {
            lower: Matrix::zeros(0),
        });
    }
    let floor = PIVOT_FLOOR * gamma[0];
    if !(gamma[0] > floor) || !(gamma[0] > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: gamma[0],
        });
    }
    let root = gamma[0].sqrt();
    let mut g: Vec<f64> = gamma.iter().map(|x| x / root).collect();
    let mut h = g.clone();
    h[0] = 0.0;
    let mut lower = Matrix::zeros(n);
    for (m, &x) in g.iter().enumerate() {
        lower[(m, 0)] = x;
    }
    for i in 1..n {
        g.copy_within(0..n - 1, 1);
        g[0] = 0.0;
        let rho = h[i] / g[i];
        let shrink = (1.0 - rho) * (1.0 + rho);
        let pivot = g[i] * g[i] * shrink;
        if !(shrink > 0.0) || !(pivot > floor) {
            return Err(Error::NotPositiveDefinite { index: i, pivot });
        }
        let s = shrink.sqrt();
        for m in i..n {
            let (a, b) = (g[m], h[m]);
            g[m] = (a - rho * b) / s;
            h[m] = (b - rho * a) / s;
            lower[(m, i)] = g[m];
        }
    }
    Ok(TriangularFactor { lower })
}
