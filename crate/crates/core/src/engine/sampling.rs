//! Exact Gaussian sampling of increment vectors.
//!
//! Path `i` draws its normals from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `i`, so its values depend only on `(seed, i)` and any parallel
//! schedule reproduces a serial run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::engine::factor::TriangularFactor;

pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Fills `z` with standard normals for path `path`.
pub fn standard_normals(seed: u64, path: u64, z: &mut [f64]) {
    let mut rng = path_rng(seed, path);
    for x in z.iter_mut() {
        *x = StandardNormal.sample(&mut rng);
    }
}

/// Reusable buffers for drawing one path at a time.
#[derive(Debug, Clone)]
pub struct PathSampler<'a> {
    factor: &'a TriangularFactor,
    seed: u64,
    normals: Vec<f64>,
}

impl<'a> PathSampler<'a> {
    pub fn new(factor: &'a TriangularFactor, seed: u64) -> Self {
        Self {
            factor,
            seed,
            normals: vec![0.0; factor.dim()],
        }
    }

    /// Writes the increments of path `path` into `out` and returns the
    /// underlying normals.
    pub fn sample_into(&mut self, path: u64, out: &mut [f64]) -> &[f64] {
        standard_normals(self.seed, path, &mut self.normals);
        self.factor.apply_into(&self.normals, out);
        &self.normals
    }
}

/// `n_paths` increment vectors `L z`, one per row.
pub fn sample_increments(factor: &TriangularFactor, n_paths: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_paths)
        .into_par_iter()
        .map_init(
            || PathSampler::new(factor, seed),
            |sampler, i| {
                let mut out = vec![0.0; factor.dim()];
                sampler.sample_into(i as u64, &mut out);
                out
            },
        )
        .collect()
}
