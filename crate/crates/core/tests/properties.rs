use local_predictor::compensator::{compensator_path, DiscretePath};
use local_predictor::engine::predictor::{EngineOptions, GaussianEngine};
use local_predictor::experiments::LevelRange;
use local_predictor::stats::quantile;
use local_predictor::{
    bisection_sequence, dyadic_sequence, fbm_covariance, GaussianIncrementModel, HurstIndex,
    Partition, PartitionSequence,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn partition_strategy() -> impl Strategy<Value = Partition> {
    (0.5f64..3.0, prop::collection::vec(0.01f64..1.0, 1..12)).prop_map(|(horizon, mut cuts)| {
        cuts.sort_by(f64::total_cmp);
        let mut times = vec![0.0];
        for c in cuts {
            if c - times.last().unwrap() / horizon >= 0.01 && c <= 0.99 {
                times.push(c * horizon);
            }
        }
        times.push(horizon);
        Partition::new(horizon, times).unwrap()
    })
}

fn hurst_strategy() -> impl Strategy<Value = HurstIndex> {
    (0.05f64..0.95).prop_map(|h| HurstIndex::new(h).unwrap())
}

proptest! {
    #[test]
    fn fbm_covariance_is_symmetric_with_power_variance(s in 0.0f64..5.0, t in 0.0f64..5.0, h in hurst_strategy()) {
        let st = fbm_covariance(s, t, h).unwrap();
        prop_assert_eq!(st, fbm_covariance(t, s, h).unwrap());
        let var = fbm_covariance(t, t, h).unwrap();
        prop_assert!((var - t.powf(2.0 * h.value())).abs() <= 1e-12 * var.max(1.0));
        // Cauchy-Schwarz
        let bound = (var * fbm_covariance(s, s, h).unwrap()).sqrt();
        prop_assert!(st.abs() <= bound + 1e-12);
    }

    #[test]
    fn increment_covariance_is_psd(p in partition_strategy(), h in hurst_strategy()) {
        let cov = GaussianIncrementModel::fbm(h, p.clone()).increment_covariance();
        let k = cov.dim();
        prop_assert!(cov.is_symmetric(1e-12));
        let eig = DMatrix::from_fn(k, k, |i, j| cov[(i, j)]).symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10);
        // variances of increments sum to the energy
        let energy: f64 = p.step_lengths().into_iter().map(|dt| h.power(dt)).sum();
        prop_assert!((cov.trace() - energy).abs() <= 1e-12 * energy.max(1.0));
    }

    #[test]
    fn conditional_variances_are_bracketed(p in partition_strategy(), h in hurst_strategy()) {
        let e = GaussianEngine::new(GaussianIncrementModel::fbm(h, p.clone()), &EngineOptions::default()).unwrap();
        for (v, dt) in e.profile().variances().iter().zip(p.step_lengths()) {
            let full = h.power(dt);
            prop_assert!(*v > 0.0 && *v <= full + 1e-12);
            if h.value() < 0.5 {
                prop_assert!(*v >= 0.5 * full - 1e-12);
            }
        }
        prop_assert!(e.terminal_compensator_variance() >= 0.0);
    }

    #[test]
    fn decomposition_identity(p in partition_strategy(), h in hurst_strategy(), seed in any::<u64>()) {
        let e = GaussianEngine::new(GaussianIncrementModel::fbm(h, p.clone()), &EngineOptions::default()).unwrap();
        let dx = local_predictor::engine::sampling::sample_increments(e.factor(), 1, seed).remove(0);
        let d = compensator_path(e.weights(), &DiscretePath::from_increments(p, &dx).unwrap()).unwrap();
        prop_assert!(d.identity_holds());
        prop_assert_eq!(d.compensator()[0], 0.0);
        prop_assert_eq!(d.compensator()[1], 0.0);
    }

    #[test]
    fn dyadic_levels_are_nested(lo in 0u32..6, extra in 0u32..5, horizon in 0.1f64..10.0) {
        let seq = dyadic_sequence(horizon, lo, lo + extra).unwrap();
        prop_assert!(PartitionSequence::check(seq.partitions()).is_ok());
        let parts = seq.partitions();
        for (i, a) in parts.iter().enumerate() {
            prop_assert_eq!(a.steps(), 1usize << (lo + i as u32));
            for b in &parts[i..] {
                prop_assert!(a.is_refined_by(b));
            }
        }
    }

    #[test]
    fn bisection_sequences_condense(levels in 1u32..9, seed in any::<u64>()) {
        let seq = bisection_sequence(1.0, levels, seed).unwrap();
        prop_assert_eq!(seq.len(), levels as usize);
        prop_assert!(PartitionSequence::check(seq.partitions()).is_ok());
        for w in seq.partitions().windows(2) {
            prop_assert!(w[0].is_refined_by(&w[1]));
            prop_assert!(w[1].mesh() <= 0.5 * w[0].mesh());
        }
    }

    #[test]
    fn refinement_is_detected(p in partition_strategy(), extra in 0.001f64..0.999) {
        let t = extra * p.horizon();
        prop_assume!(p.times().iter().all(|s| (s - t).abs() > 1e-9));
        let mut times = p.times().to_vec();
        times.push(t);
        times.sort_by(f64::total_cmp);
        let finer = Partition::new(p.horizon(), times).unwrap();
        prop_assert!(p.is_refined_by(&finer));
        prop_assert!(!finer.is_refined_by(&p));
        prop_assert!(finer.mesh() <= p.mesh());
    }

    #[test]
    fn quantiles_are_monotone(xs in prop::collection::vec(-100.0f64..100.0, 1..50), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let a = quantile(&xs, lo);
        let b = quantile(&xs, hi);
        prop_assert!(a <= b);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(a >= min && b <= max);
    }

    #[test]
    fn level_ranges_round_trip(lo in 0u32..20, extra in 0u32..20) {
        let r = LevelRange::new(lo, lo + extra).unwrap();
        prop_assert_eq!(r.to_string().parse::<LevelRange>().unwrap(), r);
    }
}
