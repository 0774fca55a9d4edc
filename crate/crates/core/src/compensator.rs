//! Path-level constructions: discretization, compensator, martingale part and
//! the statistics computed from them.
//!
//! Trajectories are stored at grid points only. Between grid points every path
//! is a right-continuous step function: its value at `t` is the value at the
//! largest grid point `<= t`.

use crate::engine::predictor::{ConditionalProfile, PredictorWeights};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::partition::{Partition, TIME_TOLERANCE};

/// Grid values `X_{t_0}, ..., X_{t_k}` of a process started at `X_{t_0} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    partition: Partition,
    values: Vec<f64>,
}

impl DiscretePath {
    pub fn new(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.times().len() {
            return Err(Error::ShapeMismatch {
                expected: partition.times().len(),
                actual: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::Config(format!(
                "paths start at 0, got initial value {}",
                values[0]
            )));
        }
        Ok(Self { partition, values })
    }

    /// Cumulative sums of `increments`, prefixed by the initial 0.
    pub fn from_increments(partition: Partition, increments: &[f64]) -> Result<Self> {
        if increments.len() != partition.steps() {
            return Err(Error::ShapeMismatch {
                expected: partition.steps(),
                actual: increments.len(),
            });
        }
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for dx in increments {
            acc += dx;
            values.push(acc);
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.partition.index_at(t).map(|j| self.values[j])
    }
}

/// A discretized path split as `X = A + M`, with `A` predictable and `M` the
/// martingale part. `M` is stored as `X - A` evaluated pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPath {
    x: DiscretePath,
    a: Vec<f64>,
    m: Vec<f64>,
}

impl DecompositionPath {
    /// Pairs a path with compensator values; `a[0]` must be 0.
    pub fn new(x: DiscretePath, a: Vec<f64>) -> Result<Self> {
        if a.len() != x.values.len() {
            return Err(Error::ShapeMismatch {
                expected: x.values.len(),
                actual: a.len(),
            });
        }
        if a[0] != 0.0 {
            return Err(Error::Config(format!(
                "compensators start at 0, got initial value {}",
                a[0]
            )));
        }
        let m = x.values.iter().zip(&a).map(|(x, a)| x - a).collect();
        Ok(Self { x, a, m })
    }

    pub fn path(&self) -> &DiscretePath {
        &self.x
    }

    pub fn compensator(&self) -> &[f64] {
        &self.a
    }

    pub fn martingale(&self) -> &[f64] {
        &self.m
    }

    /// The compensator as a step function on the path's partition.
    pub fn compensator_steps(&self) -> StepPath {
        StepPath {
            partition: self.x.partition.clone(),
            values: self.a.clone(),
        }
    }

    /// `M == X - A` bit for bit at every grid point.
    pub fn identity_holds(&self) -> bool {
        self.x
            .values
            .iter()
            .zip(&self.a)
            .zip(&self.m)
            .all(|((x, a), m)| (x - a).to_bits() == m.to_bits())
    }
}

/// Compensator of a centered Gaussian path from its predictor weights:
/// `A_{t_j} = A_{t_{j-1}} + sum_{i<j} W[j][i] dX_i`. The first increment has an
/// empty conditioning set, so `A_{t_1} = 0`.
pub fn compensator_path(
    weights: &PredictorWeights,
    path: &DiscretePath,
) -> Result<DecompositionPath> {
    let k = path.partition.steps();
    if weights.dim() != k {
        return Err(Error::ShapeMismatch {
            expected: k,
            actual: weights.dim(),
        });
    }
    let mut a = vec![0.0; k + 1];
    compensator_values(weights, &path.increments(), &mut a);
    debug_assert_eq!(a.get(1).copied(), Some(0.0));
    DecompositionPath::new(path.clone(), a)
}

/// Slice form of [`compensator_path`]: writes `A_{t_0..t_k}` into `out` from
/// the `k` increments. Shapes are the caller's responsibility.
pub fn compensator_values(weights: &PredictorWeights, increments: &[f64], out: &mut [f64]) {
    let mut acc = 0.0;
    out[0] = acc;
    for j in 0..increments.len() {
        acc += dot(weights.row(j), &increments[..j]);
        out[j + 1] = acc;
    }
}

/// Discrete quadratic variation `sum_j (Y_{t_j} - Y_{t_{j-1}})^2`; zero for
/// fewer than two values.
pub fn quadratic_variation(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            d * d
        })
        .sum()
}

/// `max_j |X_{t_j} - A_{t_j}|`, attained on the grid for step functions.
pub fn sup_deviation(d: &DecompositionPath) -> f64 {
    d.m.iter().fold(0.0, |acc, m| acc.max(m.abs()))
}

/// `sum_{j : t_j <= t} v_j`, the cumulative conditional variance up to `t`.
pub fn jacod_sum(profile: &ConditionalProfile, t: f64) -> Result<f64> {
    let partition = profile.partition();
    let horizon = partition.horizon();
    if t > horizon * (1.0 + TIME_TOLERANCE) {
        return Err(Error::Config(format!(
            "time {t} lies beyond the horizon {horizon}"
        )));
    }
    let last = match partition.index_at(t) {
        Some(j) => j,
        None => return Ok(0.0),
    };
    Ok(profile.variances()[..last].iter().sum())
}

/// A right-continuous step function given by its values on a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    partition: Partition,
    values: Vec<f64>,
}

impl StepPath {
    pub fn new(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.times().len() {
            return Err(Error::ShapeMismatch {
                expected: partition.times().len(),
                actual: values.len(),
            });
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the largest grid point `<= t`; 0 before the start.
    pub fn value_at(&self, t: f64) -> f64 {
        self.partition.index_at(t).map_or(0.0, |j| self.values[j])
    }
}

/// Cesàro mean `(1/N) sum_n A^n_t` of step-function compensators, in the
/// order given.
pub fn cesaro_average(compensators: &[StepPath], t: f64) -> Result<f64> {
    if compensators.is_empty() {
        return Err(Error::Config("Cesàro average of an empty list".into()));
    }
    let sum: f64 = compensators.iter().map(|c| c.value_at(t)).sum();
    Ok(sum / compensators.len() as f64)
}
