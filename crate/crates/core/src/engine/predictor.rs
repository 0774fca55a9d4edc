//! Regression of each increment on the observed past.
//!
//! For a centered Gaussian vector of increments `dX_1..dX_k` the conditional
//! expectation `E(dX_j | dX_1..dX_{j-1})` is linear in the past. Row `j` of
//! [`PredictorWeights`] holds its coefficients and [`ConditionalProfile`] the
//! residual (innovation) variances. The conditioning set is the finitely many
//! grid observations, never the continuous past.

use serde::Serialize;

use crate::engine::factor::{factorize_toeplitz, factorize_with_ridge, TriangularFactor};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::GaussianIncrementModel;
use crate::partition::Partition;

/// Which factorization route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum FactorMethod {
    /// Toeplitz recursion on uniform grids, dense otherwise.
    #[default]
    Auto,
    Dense,
    /// Fails with a configuration error on non-uniform grids.
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    pub method: FactorMethod,
    /// Added to the covariance diagonal before factoring. Off by default.
    pub ridge: Option<f64>,
}

/// Strictly lower-triangular `W` with `E(dX_j | past) = sum_{i<j} W[j][i] dX_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorWeights {
    matrix: Matrix,
}

impl PredictorWeights {
    /// Wraps a matrix, rejecting entries on or above the diagonal.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let n = matrix.dim();
        for i in 0..n {
            if let Some(j) = (i..n).find(|&j| matrix[(i, j)] != 0.0) {
                return Err(Error::Config(format!(
                    "predictor weights must be strictly lower triangular, entry ({i}, {j}) is {}",
                    matrix[(i, j)]
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Coefficients of row `j` on `dX_0..dX_{j-1}` (0-based).
    pub fn row(&self, j: usize) -> &[f64] {
        &self.matrix.row(j)[..j]
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// `u_i = sum_{j>i} W[j][i]`, so that the terminal compensator is `u . dX`.
    pub fn terminal_functional(&self) -> Vec<f64> {
        let n = self.dim();
        let mut u = vec![0.0; n];
        for j in 0..n {
            for (ui, w) in u.iter_mut().zip(self.row(j)) {
                *ui += w;
            }
        }
        u
    }
}

/// Innovation variances `v_j = Var(dX_j | dX_1..dX_{j-1})` on a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProfile {
    partition: Partition,
    variances: Vec<f64>,
}

impl ConditionalProfile {
    pub fn new(partition: Partition, variances: Vec<f64>) -> Result<Self> {
        if variances.len() != partition.steps() {
            return Err(Error::ShapeMismatch {
                expected: partition.steps(),
                actual: variances.len(),
            });
        }
        Ok(Self {
            partition,
            variances,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `E(X_T - A_T)^2`, the sum of all innovation variances.
    pub fn total(&self) -> f64 {
        self.variances.iter().sum()
    }
}

/// Everything the engine derives from one factorization of a model.
#[derive(Debug, Clone)]
pub struct GaussianEngine {
    model: GaussianIncrementModel,
    covariance: Matrix,
    factor: TriangularFactor,
    weights: PredictorWeights,
    profile: ConditionalProfile,
    method: FactorMethod,
}

impl GaussianEngine {
    pub fn new(model: GaussianIncrementModel, options: &EngineOptions) -> Result<Self> {
        let mut covariance = model.increment_covariance();
        let gamma = match options.method {
            FactorMethod::Dense => None,
            FactorMethod::Auto => model.increment_autocovariance(),
            FactorMethod::Toeplitz => Some(model.increment_autocovariance().ok_or_else(|| {
                Error::Config("the Toeplitz route requires a uniform partition".into())
            })?),
        };
        let (factor, weights, variances, method) = match gamma {
            Some(mut gamma) => {
                if let Some(r) = options.ridge {
                    gamma[0] += r;
                }
                let factor = factorize_toeplitz(&gamma)?;
                let (weights, variances) = levinson_durbin(&gamma)?;
                (factor, weights, variances, FactorMethod::Toeplitz)
            }
            None => {
                let factor = factorize_with_ridge(&covariance, options.ridge)?;
                let (weights, variances) = weights_from_factor(&factor);
                (factor, weights, variances, FactorMethod::Dense)
            }
        };
        if let Some(r) = options.ridge {
            for j in 0..covariance.dim() {
                covariance[(j, j)] += r;
            }
        }
        let profile = ConditionalProfile::new(model.partition().clone(), variances)?;
        Ok(Self {
            model,
            covariance,
            factor,
            weights,
            profile,
            method,
        })
    }

    pub fn model(&self) -> &GaussianIncrementModel {
        &self.model
    }

    /// Increment covariance, including the ridge when one was requested.
    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn factor(&self) -> &TriangularFactor {
        &self.factor
    }

    pub fn weights(&self) -> &PredictorWeights {
        &self.weights
    }

    pub fn profile(&self) -> &ConditionalProfile {
        &self.profile
    }

    /// The route actually taken.
    pub fn method(&self) -> FactorMethod {
        self.method
    }

    pub fn terminal_compensator_variance(&self) -> f64 {
        terminal_compensator_variance(&self.weights, &self.covariance)
            .expect("weights and covariance share the model's dimension")
    }
}

/// Predictor weights and innovation variances with default options.
pub fn predictor_weights(
    model: &GaussianIncrementModel,
) -> Result<(PredictorWeights, ConditionalProfile)> {
    predictor_weights_with(model, &EngineOptions::default())
}

pub fn predictor_weights_with(
    model: &GaussianIncrementModel,
    options: &EngineOptions,
) -> Result<(PredictorWeights, ConditionalProfile)> {
    let engine = GaussianEngine::new(model.clone(), options)?;
    Ok((engine.weights, engine.profile))
}

/// Row `j` of `W` solves `L'^T w = l_j`, where `L'` is the leading `j x j`
/// block of the factor and `l_j` the off-diagonal part of row `j`; the
/// innovation variance is `L[j][j]^2`.
pub fn weights_from_factor(factor: &TriangularFactor) -> (PredictorWeights, Vec<f64>) {
    let lower = factor.lower();
    let n = factor.dim();
    let mut w = Matrix::zeros(n);
    let mut rhs = Vec::with_capacity(n);
    for j in 1..n {
        rhs.clear();
        rhs.extend_from_slice(&lower.row(j)[..j]);
        // Back substitution by columns of L'^T, i.e. rows of L'.
        for p in (0..j).rev() {
            let lp = lower.row(p);
            let x = rhs[p] / lp[p];
            rhs[p] = x;
            for (r, l) in rhs[..p].iter_mut().zip(&lp[..p]) {
                *r -= l * x;
            }
        }
        w.row_mut(j)[..j].copy_from_slice(&rhs);
    }
    let variances = lower.diagonal().into_iter().map(|d| d * d).collect();
    (PredictorWeights { matrix: w }, variances)
}

/// Durbin-Levinson recursion for a stationary sequence with autocovariance
/// `gamma`: forward predictor coefficients of every order plus the
/// prediction-error variances, in `O(k^2)`.
pub fn levinson_durbin(gamma: &[f64]) -> Result<(PredictorWeights, Vec<f64>)> {
    let n = gamma.len();
    let mut w = Matrix::zeros(n);
    let mut variances = Vec::with_capacity(n);
    if n == 0 {
        return Ok((PredictorWeights { matrix: w }, variances));
    }
    let floor = super::factor::PIVOT_FLOOR * gamma[0];
    let mut v = gamma[0];
    if !(v > floor) {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: v });
    }
    variances.push(v);
    // phi[m - 1] is the coefficient on the value m steps back.
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    for order in 1..n {
        let fitted: f64 = phi
            .iter()
            .zip(gamma[1..order].iter().rev())
            .map(|(p, g)| p * g)
            .sum();
        let kappa = (gamma[order] - fitted) / v;
        prev.clear();
        prev.extend_from_slice(&phi);
        for m in 0..order - 1 {
            phi[m] = prev[m] - kappa * prev[order - 2 - m];
        }
        phi.push(kappa);
        v *= (1.0 - kappa) * (1.0 + kappa);
        if !(v > floor) {
            return Err(Error::NotPositiveDefinite {
                index: order,
                pivot: v,
            });
        }
        variances.push(v);
        let row = w.row_mut(order);
        for (m, &c) in phi.iter().enumerate() {
            row[order - 1 - m] = c;
        }
    }
    Ok((PredictorWeights { matrix: w }, variances))
}

/// `Var(A_T) = u^T Sigma u` with `u_i = sum_{j>i} W[j][i]`.
pub fn terminal_compensator_variance(weights: &PredictorWeights, cov: &Matrix) -> Result<f64> {
    if weights.dim() != cov.dim() {
        return Err(Error::ShapeMismatch {
            expected: cov.dim(),
            actual: weights.dim(),
        });
    }
    let u = weights.terminal_functional();
    Ok(cov.quadratic_form(&u).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HurstIndex;

    fn model(h: f64, k: usize) -> GaussianIncrementModel {
        GaussianIncrementModel::fbm(
            HurstIndex::new(h).unwrap(),
            Partition::uniform(1.0, k).unwrap(),
        )
    }

    fn dense() -> EngineOptions {
        EngineOptions {
            method: FactorMethod::Dense,
            ridge: None,
        }
    }

    #[test]
    fn brownian_weights_vanish() {
        let p = Partition::new(2.0, vec![0.0, 0.3, 0.5, 1.7, 2.0]).unwrap();
        let m = GaussianIncrementModel::fbm(HurstIndex::brownian(), p.clone());
        let (w, v) = predictor_weights(&m).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        for (vj, dt) in v.variances().iter().zip(p.step_lengths()) {
            assert!((vj - dt).abs() < 1e-15);
        }
        let cov = m.increment_covariance();
        assert_eq!(terminal_compensator_variance(&w, &cov).unwrap(), 0.0);
    }

    #[test]
    fn first_row_has_no_past() {
        for h in [0.2, 0.7] {
            let m = model(h, 10);
            for opts in [dense(), EngineOptions::default()] {
                let (w, v) = predictor_weights_with(&m, &opts).unwrap();
                assert!(w.matrix().row(0).iter().all(|&x| x == 0.0));
                let expected = (0.1f64).powf(2.0 * h);
                assert!((v.variances()[0] - expected).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn weights_are_strictly_lower() {
        let (w, _) = predictor_weights_with(&model(0.3, 12), &dense()).unwrap();
        assert!(PredictorWeights::new(w.matrix().clone()).is_ok());
        assert!(PredictorWeights::new(Matrix::identity(2)).is_err());
    }

    #[test]
    fn normal_equations_hold_dense_and_toeplitz() {
        for h in [0.25, 0.75] {
            let m = model(h, 32);
            let cov = m.increment_covariance();
            for opts in [dense(), EngineOptions::default()] {
                let (w, v) = predictor_weights_with(&m, &opts).unwrap();
                for j in 0..32 {
                    let row = w.row(j);
                    for mm in 0..j {
                        let lhs: f64 = (0..j).map(|i| row[i] * cov[(i, mm)]).sum();
                        let rhs = cov[(j, mm)];
                        assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(cov[(j, j)]));
                    }
                    let resid = cov[(j, j)] - (0..j).map(|i| row[i] * cov[(j, i)]).sum::<f64>();
                    assert!((resid - v.variances()[j]).abs() <= 1e-8 * cov[(j, j)]);
                }
            }
        }
    }

    #[test]
    fn toeplitz_requires_uniform_grid() {
        let p = Partition::new(1.0, vec![0.0, 0.2, 1.0]).unwrap();
        let m = GaussianIncrementModel::fbm(HurstIndex::new(0.3).unwrap(), p);
        let opts = EngineOptions {
            method: FactorMethod::Toeplitz,
            ridge: None,
        };
        assert!(matches!(
            GaussianEngine::new(m.clone(), &opts),
            Err(Error::Config(_))
        ));
        let auto = GaussianEngine::new(m, &EngineOptions::default()).unwrap();
        assert_eq!(auto.method(), FactorMethod::Dense);
    }

    #[test]
    fn ridge_routes_agree() {
        let m = model(0.6, 16);
        let run = |method| {
            GaussianEngine::new(
                m.clone(),
                &EngineOptions {
                    method,
                    ridge: Some(1e-3),
                },
            )
            .unwrap()
        };
        let (a, b) = (run(FactorMethod::Dense), run(FactorMethod::Toeplitz));
        assert!(a.weights().matrix().max_abs_diff(b.weights().matrix()) < 1e-10);
        assert_eq!(a.covariance(), b.covariance());
        assert!(a.profile().variances()[0] > 0.0625f64.powf(1.2));
    }

    #[test]
    fn terminal_variance_shape_checked() {
        let (w, _) = predictor_weights(&model(0.3, 4)).unwrap();
        assert!(terminal_compensator_variance(&w, &Matrix::identity(3)).is_err());
    }
}
