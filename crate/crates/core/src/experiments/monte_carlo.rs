//! Per-path statistics of compensator decompositions, sampled in parallel.

use rayon::prelude::*;

use crate::compensator::{compensator_values, quadratic_variation};
use crate::engine::predictor::GaussianEngine;
use crate::engine::sampling::PathSampler;
use crate::stats::{quantile, Estimate};

/// Statistics of one sampled path `X` and its compensator `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    /// `max_j (X_{t_j} - A_{t_j})^2`.
    pub sup2: f64,
    /// `max_j |X_{t_j} - A_{t_j}|`.
    pub sup: f64,
    /// `A_T`.
    pub terminal_a: f64,
    /// `[X]_T`.
    pub qv: f64,
    /// `[X - A]_T`.
    pub qv_martingale: f64,
    /// `max_j |A_{t_j}|`.
    pub sup_abs_a: f64,
}

struct Buffers<'a> {
    sampler: PathSampler<'a>,
    dx: Vec<f64>,
    x: Vec<f64>,
    a: Vec<f64>,
}

/// Samples `n_paths` paths of the engine's model. Results are in path order
/// and independent of the thread count.
pub fn simulate(engine: &GaussianEngine, n_paths: usize, seed: u64) -> Vec<PathStats> {
    let k = engine.model().steps();
    (0..n_paths as u64)
        .into_par_iter()
        .map_init(
            || Buffers {
                sampler: PathSampler::new(engine.factor(), seed),
                dx: vec![0.0; k],
                x: vec![0.0; k + 1],
                a: vec![0.0; k + 1],
            },
            |buf, i| {
                buf.sampler.sample_into(i, &mut buf.dx);
                let mut acc = 0.0;
                buf.x[0] = 0.0;
                for (xj, d) in buf.x[1..].iter_mut().zip(&buf.dx) {
                    acc += d;
                    *xj = acc;
                }
                compensator_values(engine.weights(), &buf.dx, &mut buf.a);
                path_stats(&buf.x, &buf.a)
            },
        )
        .collect()
}

/// Statistics from grid values of `X` and `A`.
pub fn path_stats(x: &[f64], a: &[f64]) -> PathStats {
    let mut sup = 0.0f64;
    let mut sup_abs_a = 0.0f64;
    let mut qv_martingale = 0.0;
    let mut prev_m = 0.0;
    for (xj, aj) in x.iter().zip(a) {
        let m = xj - aj;
        sup = sup.max(m.abs());
        sup_abs_a = sup_abs_a.max(aj.abs());
        qv_martingale += (m - prev_m) * (m - prev_m);
        prev_m = m;
    }
    PathStats {
        sup2: sup * sup,
        sup,
        terminal_a: *a.last().unwrap(),
        qv: quadratic_variation(x),
        qv_martingale,
        sup_abs_a,
    }
}

/// Aggregates over a batch of sampled paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub sup2: Estimate,
    pub sup: Estimate,
    pub sup_q95: f64,
    /// Sample variance of `A_T` and the standard error of that estimate.
    pub var_terminal_a: Estimate,
    pub qv: Estimate,
    pub qv_martingale: Estimate,
    pub sup_abs_a_max: f64,
}

pub fn summarize(stats: &[PathStats]) -> BatchSummary {
    let sup: Vec<f64> = stats.iter().map(|s| s.sup).collect();
    let n = stats.len() as f64;
    let mean_a = stats.iter().map(|s| s.terminal_a).sum::<f64>() / n;
    let centered = Estimate::from_iter(stats.iter().map(|s| (s.terminal_a - mean_a).powi(2)));
    let correction = if stats.len() > 1 { n / (n - 1.0) } else { 1.0 };
    BatchSummary {
        sup2: Estimate::from_iter(stats.iter().map(|s| s.sup2)),
        sup: Estimate::from_samples(&sup),
        sup_q95: quantile(&sup, 0.95),
        var_terminal_a: Estimate {
            mean: centered.mean * correction,
            se: centered.se * correction,
            n: centered.n,
        },
        qv: Estimate::from_iter(stats.iter().map(|s| s.qv)),
        qv_martingale: Estimate::from_iter(stats.iter().map(|s| s.qv_martingale)),
        sup_abs_a_max: stats.iter().fold(0.0, |m, s| m.max(s.sup_abs_a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_stats_by_hand() {
        let x = [0.0, 1.0, -1.0, 0.5];
        let a = [0.0, 0.0, 0.5, 0.25];
        let s = path_stats(&x, &a);
        assert_eq!(s.sup, 1.5);
        assert_eq!(s.sup2, 2.25);
        assert_eq!(s.terminal_a, 0.25);
        assert_eq!(s.qv, 1.0 + 4.0 + 2.25);
        // M = 0, 1, -1.5, 0.25
        assert_eq!(s.qv_martingale, 1.0 + 6.25 + 3.0625);
        assert_eq!(s.sup_abs_a, 0.5);
    }
}
