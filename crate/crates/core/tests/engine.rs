use local_predictor::engine::factor::{factorize, factorize_with_ridge};
use local_predictor::engine::predictor::{
    terminal_compensator_variance, EngineOptions, FactorMethod, GaussianEngine,
};
use local_predictor::engine::sampling::sample_increments;
use local_predictor::linalg::Matrix;
use local_predictor::{
    bisection_sequence, fbm_covariance, Error, GaussianIncrementModel, HurstIndex, Partition,
};
use nalgebra::DMatrix;

fn hurst(h: f64) -> HurstIndex {
    HurstIndex::new(h).unwrap()
}

fn engine(h: f64, partition: Partition) -> GaussianEngine {
    GaussianEngine::new(
        GaussianIncrementModel::fbm(hurst(h), partition),
        &EngineOptions::default(),
    )
    .unwrap()
}

fn to_nalgebra(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)])
}

/// Least-squares regression of the increment `j` on the earlier ones, solved
/// by nalgebra's LU rather than by the engine.
fn regression_oracle(cov: &Matrix, j: usize) -> (Vec<f64>, f64) {
    if j == 0 {
        return (Vec::new(), cov[(0, 0)]);
    }
    let past = DMatrix::from_fn(j, j, |a, b| cov[(a, b)]);
    let rhs = nalgebra::DVector::from_fn(j, |a, _| cov[(j, a)]);
    let w = past.lu().solve(&rhs).unwrap();
    let v = cov[(j, j)] - w.dot(&rhs);
    (w.iter().copied().collect(), v)
}

#[test]
fn increment_covariance_is_symmetric_and_psd() {
    for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for partition in [
            Partition::uniform(1.0, 64).unwrap(),
            Partition::new(2.0, vec![0.0, 0.1, 0.15, 0.7, 1.2, 2.0]).unwrap(),
        ] {
            let cov = GaussianIncrementModel::fbm(hurst(h), partition).increment_covariance();
            assert!(cov.is_symmetric(1e-12));
            let eig = to_nalgebra(&cov).symmetric_eigenvalues();
            assert!(eig.min() >= -1e-10, "H={h}: min eigenvalue {}", eig.min());
        }
    }
}

#[test]
fn increment_covariance_matches_polarization_of_fbm_covariance() {
    let p = Partition::new(1.0, vec![0.0, 0.2, 0.25, 0.6, 1.0]).unwrap();
    let h = hurst(0.35);
    let cov = GaussianIncrementModel::fbm(h, p.clone()).increment_covariance();
    let t = p.times();
    let r = |a: f64, b: f64| fbm_covariance(a, b, h).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expect =
                r(t[i + 1], t[j + 1]) - r(t[i + 1], t[j]) - r(t[i], t[j + 1]) + r(t[i], t[j]);
            assert!((cov[(i, j)] - expect).abs() <= 1e-14);
        }
    }
}

#[test]
fn factor_round_trip_at_h_075_k_8() {
    let cov = GaussianIncrementModel::fbm(hurst(0.75), Partition::uniform(1.0, 8).unwrap())
        .increment_covariance();
    let l = factorize(&cov).unwrap();
    assert!(l.reconstruct().max_abs_diff(&cov) <= 1e-12);
    for i in 0..8 {
        assert!(l.lower()[(i, i)] > 0.0);
        for j in i + 1..8 {
            assert_eq!(l.lower()[(i, j)], 0.0);
        }
    }
}

#[test]
fn weights_and_variances_match_regression_oracle() {
    for h in [0.25, 0.5, 0.75] {
        let partitions = [
            Partition::uniform(1.0, 8).unwrap(),
            bisection_sequence(1.0, 4, 11).unwrap().partitions()[3].clone(),
        ];
        for p in partitions {
            let e = engine(h, p);
            let cov = e.covariance();
            for j in 0..e.model().steps() {
                let (w, v) = regression_oracle(cov, j);
                let row = e.weights().row(j);
                for (a, b) in row.iter().zip(&w) {
                    assert!((a - b).abs() <= 1e-9, "H={h}, j={j}: {a} vs {b}");
                }
                assert!((e.profile().variances()[j] - v).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn normal_equations_on_non_uniform_grids() {
    let seq = bisection_sequence(1.0, 6, 3).unwrap();
    for h in [0.2, 0.8] {
        for p in seq.iter() {
            let e = engine(h, p.clone());
            assert_eq!(
                e.method(),
                if p.is_uniform() {
                    FactorMethod::Toeplitz
                } else {
                    FactorMethod::Dense
                }
            );
            let cov = e.covariance();
            let scale = cov.max_abs();
            for j in 1..p.steps() {
                for m in 0..j {
                    let lhs: f64 = e
                        .weights()
                        .row(j)
                        .iter()
                        .enumerate()
                        .map(|(i, w)| w * cov[(i, m)])
                        .sum();
                    assert!((lhs - cov[(j, m)]).abs() <= 1e-8 * scale);
                }
            }
        }
    }
}

#[test]
fn conditional_variance_is_bounded_by_the_step_variance() {
    for h in [0.1, 0.5, 0.9] {
        let p = bisection_sequence(1.0, 5, 8).unwrap().partitions()[4].clone();
        let e = engine(h, p.clone());
        for (v, dt) in e.profile().variances().iter().zip(p.step_lengths()) {
            assert!(*v > 0.0 && *v <= hurst(h).power(dt) + 1e-12);
        }
    }
}

#[test]
fn innovation_floor_on_non_uniform_grids() {
    for h in [0.1, 0.25, 0.4] {
        for p in bisection_sequence(1.0, 5, 21).unwrap().iter() {
            let e = engine(h, p.clone());
            for (v, dt) in e.profile().variances().iter().zip(p.step_lengths()) {
                assert!(*v >= 0.5 * hurst(h).power(dt) - 1e-12);
            }
        }
    }
}

#[test]
fn explosion_example_at_k_64() {
    let e = engine(0.25, Partition::uniform(1.0, 64).unwrap());
    let floor = 0.5 * (1.0f64 / 64.0).sqrt();
    assert!(e.profile().variances().iter().all(|v| *v >= floor));
    assert!(e.profile().total() >= 4.0);
}

#[test]
fn terminal_variance_from_the_factor_columns() {
    // A_T = sum_j sum_{i<j} L[j][i] z_i, so Var(A_T) is the squared norm of the
    // strict-lower column sums of L.
    for h in [0.25, 0.75] {
        let e = engine(h, Partition::uniform(1.0, 128).unwrap());
        let l = e.factor().lower();
        let k = l.dim();
        let oracle: f64 = (0..k)
            .map(|i| (i + 1..k).map(|j| l[(j, i)]).sum::<f64>().powi(2))
            .sum();
        let var = e.terminal_compensator_variance();
        assert!(
            (var - oracle).abs() <= 1e-9 * oracle.max(1.0),
            "{var} vs {oracle}"
        );
    }
}

#[test]
fn terminal_variance_triangle_bound() {
    for level in 4..=10 {
        let e = engine(0.25, Partition::uniform(1.0, 1 << level).unwrap());
        let gap = e.profile().total().sqrt() - 1.0;
        if gap > 0.0 {
            assert!(e.terminal_compensator_variance() >= gap * gap);
        }
    }
}

#[test]
fn terminal_variance_rejects_mismatched_shapes() {
    let a = engine(0.6, Partition::uniform(1.0, 4).unwrap());
    let b = engine(0.6, Partition::uniform(1.0, 8).unwrap());
    assert!(matches!(
        terminal_compensator_variance(a.weights(), b.covariance()),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn toeplitz_requires_a_uniform_grid() {
    let p = Partition::new(1.0, vec![0.0, 0.3, 1.0]).unwrap();
    let opts = EngineOptions {
        method: FactorMethod::Toeplitz,
        ridge: None,
    };
    assert!(GaussianEngine::new(GaussianIncrementModel::fbm(hurst(0.7), p), &opts).is_err());
}

#[test]
fn singular_covariance_fails_without_ridge() {
    let cov = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(matches!(
        factorize(&cov),
        Err(Error::NotPositiveDefinite { index: 1, .. })
    ));
    let l = factorize_with_ridge(&cov, Some(1e-6)).unwrap();
    assert!(l.lower()[(1, 1)] > 0.0);
}

#[test]
fn sampled_increments_have_the_model_covariance() {
    let n = 100_000;
    for (h, k) in [(0.5, 4), (0.75, 8)] {
        let e = engine(h, Partition::uniform(1.0, k).unwrap());
        let xs = sample_increments(e.factor(), n, 42);
        let cov = e.covariance();
        for a in 0..k {
            for b in 0..=a {
                let prods: Vec<f64> = xs.iter().map(|x| x[a] * x[b]).collect();
                let mean = prods.iter().sum::<f64>() / n as f64;
                let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!(
                    (mean - cov[(a, b)]).abs() <= 4.0 * se,
                    "H={h} ({a},{b}): {mean} vs {}",
                    cov[(a, b)]
                );
            }
        }
    }
}

#[test]
fn sampling_is_reproducible_and_seed_dependent() {
    let e = engine(0.6, Partition::uniform(1.0, 16).unwrap());
    let a = sample_increments(e.factor(), 50, 9);
    assert_eq!(a, sample_increments(e.factor(), 50, 9));
    assert_ne!(a, sample_increments(e.factor(), 50, 10));
    assert_eq!(a[..20], sample_increments(e.factor(), 20, 9)[..]);
}
