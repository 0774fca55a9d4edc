//! Covariance models for fractional Brownian motion sampled on a grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::partition::Partition;

/// Hurst index `H` in the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::InvalidHurst(h))
        }
    }

    /// Brownian motion, `H = 1/2`.
    pub fn brownian() -> Self {
        Self(0.5)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }

    /// `|x|^{2H}`.
    #[inline]
    pub fn power(self, x: f64) -> f64 {
        if self.is_brownian() {
            x.abs()
        } else {
            x.abs().powf(2.0 * self.0)
        }
    }
}

impl TryFrom<f64> for HurstIndex {
    type Error = Error;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstIndex> for f64 {
    fn from(h: HurstIndex) -> f64 {
        h.0
    }
}

/// `E(B_s B_t) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, h: HurstIndex) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::NegativeTime(s));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(0.5 * (h.power(t) + h.power(s) - h.power(t - s)))
}

/// Process families whose increments on a grid are jointly Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProcessKind {
    Fbm(HurstIndex),
}

/// A Gaussian process (started at 0) observed on a partition, described through
/// the covariance of its increments `X_{t_j} - X_{t_{j-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianIncrementModel {
    kind: ProcessKind,
    partition: Partition,
}

impl GaussianIncrementModel {
    pub fn new(kind: ProcessKind, partition: Partition) -> Self {
        Self { kind, partition }
    }

    pub fn fbm(hurst: HurstIndex, partition: Partition) -> Self {
        Self::new(ProcessKind::Fbm(hurst), partition)
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn hurst(&self) -> HurstIndex {
        match self.kind {
            ProcessKind::Fbm(h) => h,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn steps(&self) -> usize {
        self.partition.steps()
    }

    /// `k x k` covariance of the increment vector.
    ///
    /// Entry `(i, j)` is the polarization
    /// `(|t_i - t_{j-1}|^{2H} + |t_{i-1} - t_j|^{2H} - |t_i - t_j|^{2H} - |t_{i-1} - t_{j-1}|^{2H}) / 2`,
    /// in which the `t^{2H}` terms of the position covariance have cancelled.
    pub fn increment_covariance(&self) -> Matrix {
        let h = self.hurst();
        let t = self.partition.times();
        let k = self.steps();
        let mut cov = Matrix::zeros(k);
        for i in 0..k {
            cov[(i, i)] = h.power(t[i + 1] - t[i]);
            if h.is_brownian() {
                continue;
            }
            for j in 0..i {
                let c = 0.5
                    * (h.power(t[i + 1] - t[j]) + h.power(t[i] - t[j + 1])
                        - h.power(t[i + 1] - t[j + 1])
                        - h.power(t[i] - t[j]));
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        cov
    }

    /// First column of the (Toeplitz) increment covariance on uniform grids:
    /// `gamma(n) = dt^{2H} (|n+1|^{2H} - 2|n|^{2H} + |n-1|^{2H}) / 2`.
    pub fn increment_autocovariance(&self) -> Option<Vec<f64>> {
        if !self.partition.is_uniform() {
            return None;
        }
        let h = self.hurst();
        let k = self.steps();
        let scale = h.power(self.partition.horizon() / k as f64);
        let gamma = (0..k)
            .map(|n| {
                if n == 0 {
                    scale
                } else if h.is_brownian() {
                    0.0
                } else {
                    let n = n as f64;
                    0.5 * scale * (h.power(n + 1.0) - 2.0 * h.power(n) + h.power(n - 1.0))
                }
            })
            .collect();
        Some(gamma)
    }

    /// Expected discrete quadratic variation `E[X]_T = sum_j (dt_j)^{2H}`.
    pub fn analytic_energy(&self) -> f64 {
        let h = self.hurst();
        self.partition
            .step_lengths()
            .into_iter()
            .map(|dt| h.power(dt))
            .sum()
    }
}
