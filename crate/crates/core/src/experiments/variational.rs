//! The compensator as a minimizer: among predictable processes `A'`, the
//! computed compensator minimizes `E[X - A']_T`. Compared by Monte Carlo
//! against random perturbations of the predictor weights, on common paths.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::compensator::compensator_values;
use crate::engine::predictor::{GaussianEngine, PredictorWeights};
use crate::engine::sampling::{path_rng, PathSampler};
use crate::experiments::monte_carlo::path_stats;
use crate::stats::Estimate;

/// Stream reserved for drawing perturbations, away from path streams.
const PERTURBATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationOutcome {
    /// `E[X - A']_T` under the perturbed weights.
    pub perturbed: Estimate,
    /// Paired difference `[X - A']_T - [X - A]_T`.
    pub difference: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalCheck {
    /// `E[X - A]_T` under the computed weights.
    pub optimal: Estimate,
    pub perturbations: Vec<PerturbationOutcome>,
}

impl VariationalCheck {
    /// Every perturbation scores no better than the computed weights, up to
    /// `bands` standard errors of the paired difference.
    pub fn optimal_within(&self, bands: f64) -> bool {
        self.perturbations
            .iter()
            .all(|p| p.difference.mean >= -bands * p.difference.se)
    }
}

/// Strictly lower-triangular Gaussian perturbations of `weights` with
/// standard deviation `scale`; predictability is preserved.
pub fn perturb_weights(
    weights: &PredictorWeights,
    count: usize,
    scale: f64,
    seed: u64,
) -> Vec<PredictorWeights> {
    let mut rng = path_rng(seed, PERTURBATION_STREAM);
    let n = weights.dim();
    (0..count)
        .map(|_| {
            let mut m = weights.matrix().clone();
            for j in 1..n {
                for i in 0..j {
                    let z: f64 = rng.sample(StandardNormal);
                    m[(j, i)] += scale * z;
                }
            }
            PredictorWeights::new(m).expect("perturbation keeps the strict lower triangle")
        })
        .collect()
}

/// Estimates `E[X - A]_T` for the engine's weights and for `n_perturb`
/// perturbations at `scale`, all on the same `n_paths` sampled paths.
pub fn variational_check(
    engine: &GaussianEngine,
    n_paths: usize,
    n_perturb: usize,
    scale: f64,
    seed: u64,
) -> VariationalCheck {
    let k = engine.model().steps();
    let mut candidates = vec![engine.weights().clone()];
    candidates.extend(perturb_weights(engine.weights(), n_perturb, scale, seed));
    // rows: paths; columns: candidates
    let per_path: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map_init(
            || {
                (
                    PathSampler::new(engine.factor(), seed),
                    vec![0.0; k],
                    vec![0.0; k + 1],
                    vec![0.0; k + 1],
                )
            },
            |(sampler, dx, x, a), i| {
                sampler.sample_into(i, dx);
                let mut acc = 0.0;
                for (xj, d) in x[1..].iter_mut().zip(dx.iter()) {
                    acc += d;
                    *xj = acc;
                }
                candidates
                    .iter()
                    .map(|w| {
                        compensator_values(w, dx, a);
                        path_stats(x, a).qv_martingale
                    })
                    .collect()
            },
        )
        .collect();
    let column = |c: usize| per_path.iter().map(move |row| row[c]);
    let optimal = Estimate::from_iter(column(0));
    let perturbations = (1..candidates.len())
        .map(|c| PerturbationOutcome {
            perturbed: Estimate::from_iter(column(c)),
            difference: Estimate::from_iter(per_path.iter().map(|row| row[c] - row[0])),
        })
        .collect();
    VariationalCheck {
        optimal,
        perturbations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::predictor::EngineOptions;
    use crate::model::{GaussianIncrementModel, HurstIndex};
    use crate::partition::Partition;

    #[test]
    fn perturbations_stay_predictable_and_reproducible() {
        let m = GaussianIncrementModel::fbm(
            HurstIndex::new(0.3).unwrap(),
            Partition::uniform(1.0, 5).unwrap(),
        );
        let e = GaussianEngine::new(m, &EngineOptions::default()).unwrap();
        let a = perturb_weights(e.weights(), 3, 0.1, 1);
        let b = perturb_weights(e.weights(), 3, 0.1, 1);
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert!(a
            .iter()
            .all(|w| w.matrix().row(0).iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn zero_scale_is_a_tie() {
        let m = GaussianIncrementModel::fbm(
            HurstIndex::new(0.7).unwrap(),
            Partition::uniform(1.0, 4).unwrap(),
        );
        let e = GaussianEngine::new(m, &EngineOptions::default()).unwrap();
        let check = variational_check(&e, 200, 2, 0.0, 5);
        assert!(check.perturbations.iter().all(|p| p.difference.mean == 0.0));
        assert!(check.optimal_within(0.0));
    }
}
