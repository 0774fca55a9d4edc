//! Sampling grids on `[0, T]` and nested (condensing) sequences of them.
//!
//! Grids whose points are dyadic fractions of the horizon keep their integer
//! coordinates `j` (with `t = j * T / 2^level`), so nesting is decided by exact
//! integer comparison. Other grids fall back to a floating-point comparison
//! with tolerance `1e-12 * T`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative tolerance for comparing grid points that have no exact lattice form.
pub const TIME_TOLERANCE: f64 = 1e-12;

const MAX_DYADIC_LEVEL: u32 = 52;

#[derive(Debug, Clone, PartialEq)]
struct DyadicLattice {
    level: u32,
    indices: Vec<u64>,
}

impl DyadicLattice {
    fn lifted(&self, level: u32) -> impl Iterator<Item = u64> + '_ {
        let shift = level - self.level;
        self.indices.iter().map(move |&j| j << shift)
    }
}

/// Strictly increasing grid `0 = t_0 < t_1 < ... < t_k = T` with `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    horizon: f64,
    times: Vec<f64>,
    lattice: Option<DyadicLattice>,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidPartition(format!(
            "horizon must be finite and positive, got {horizon}"
        )));
    }
    Ok(())
}

impl Partition {
    /// Builds a partition from explicit times. The last point must equal the
    /// horizon up to `1e-12 * T` and is pinned to `T` exactly.
    pub fn new(horizon: f64, mut times: Vec<f64>) -> Result<Self> {
        check_horizon(horizon)?;
        if times.len() < 2 {
            return Err(Error::InvalidPartition(
                "a partition needs at least two points".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPartition(format!(
                "first point must be 0, got {}",
                times[0]
            )));
        }
        let last = times.len() - 1;
        if (times[last] - horizon).abs() > TIME_TOLERANCE * horizon {
            return Err(Error::InvalidPartition(format!(
                "last point must equal the horizon {horizon}, got {}",
                times[last]
            )));
        }
        times[last] = horizon;
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPartition(format!(
                "times must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            horizon,
            times,
            lattice: None,
        })
    }

    /// Partition on the dyadic lattice `j * T / 2^level`, given by the integer
    /// coordinates `j` of its points.
    pub fn dyadic(horizon: f64, level: u32, indices: Vec<u64>) -> Result<Self> {
        check_horizon(horizon)?;
        if level > MAX_DYADIC_LEVEL {
            return Err(Error::InvalidPartition(format!(
                "dyadic level {level} exceeds {MAX_DYADIC_LEVEL}"
            )));
        }
        let top = 1u64 << level;
        if indices.len() < 2 || indices[0] != 0 || *indices.last().unwrap() != top {
            return Err(Error::InvalidPartition(format!(
                "dyadic indices must run from 0 to {top}"
            )));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPartition(
                "dyadic indices must be strictly increasing".into(),
            ));
        }
        let scale = horizon / top as f64;
        let mut times: Vec<f64> = indices.iter().map(|&j| j as f64 * scale).collect();
        *times.last_mut().unwrap() = horizon;
        Ok(Self {
            horizon,
            times,
            lattice: Some(DyadicLattice { level, indices }),
        })
    }

    /// `k + 1` equally spaced points `j * T / k`.
    pub fn uniform(horizon: f64, k: usize) -> Result<Self> {
        check_horizon(horizon)?;
        if k == 0 {
            return Err(Error::InvalidPartition(
                "a uniform partition needs k >= 1".into(),
            ));
        }
        if k.is_power_of_two() {
            let level = k.trailing_zeros();
            return Self::dyadic(horizon, level, (0..=k as u64).collect());
        }
        let mut times: Vec<f64> = (0..=k).map(|j| j as f64 * horizon / k as f64).collect();
        times[k] = horizon;
        Ok(Self {
            horizon,
            times,
            lattice: None,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of steps `k` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Step lengths `t_j - t_{j-1}`, `j = 1..=k`.
    pub fn step_lengths(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mesh(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Dyadic level when the grid lives on a dyadic lattice.
    pub fn dyadic_level(&self) -> Option<u32> {
        self.lattice.as_ref().map(|l| l.level)
    }

    /// All steps have the same length (exactly on a lattice, else within tolerance).
    pub fn is_uniform(&self) -> bool {
        if let Some(lat) = &self.lattice {
            let first = lat.indices[1] - lat.indices[0];
            return lat.indices.windows(2).all(|w| w[1] - w[0] == first);
        }
        let first = self.times[1] - self.times[0];
        let tol = TIME_TOLERANCE * self.horizon;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - first).abs() <= tol)
    }

    /// Index of the largest grid point `<= t`; `None` for `t < 0`.
    /// Times past the horizon map to the last point.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        if t < 0.0 {
            return None;
        }
        Some(self.times.partition_point(|&s| s <= t).saturating_sub(1))
    }

    /// Whether every point of `self` is also a point of `finer`.
    pub fn is_refined_by(&self, finer: &Partition) -> bool {
        if self.horizon != finer.horizon {
            return false;
        }
        if let (Some(a), Some(b)) = (&self.lattice, &finer.lattice) {
            let level = a.level.max(b.level);
            let mut fine = b.lifted(level).peekable();
            return a.lifted(level).all(|x| {
                while let Some(&y) = fine.peek() {
                    if y < x {
                        fine.next();
                    } else {
                        return y == x;
                    }
                }
                false
            });
        }
        let tol = TIME_TOLERANCE * self.horizon;
        self.times.iter().all(|&t| {
            let pos = finer.times.partition_point(|&s| s < t - tol);
            pos < finer.times.len() && (finer.times[pos] - t).abs() <= tol
        })
    }
}

/// Nested partitions with strictly decreasing mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSequence {
    partitions: Vec<Partition>,
}

impl PartitionSequence {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        Self::check(&partitions)?;
        Ok(Self { partitions })
    }

    /// Nesting and strict mesh decrease between consecutive members.
    pub fn check(partitions: &[Partition]) -> Result<()> {
        if partitions.is_empty() {
            return Err(Error::InvalidPartition(
                "a partition sequence cannot be empty".into(),
            ));
        }
        for (n, pair) in partitions.windows(2).enumerate() {
            if !pair[0].is_refined_by(&pair[1]) {
                return Err(Error::InvalidPartition(format!(
                    "partition {n} is not contained in partition {}",
                    n + 1
                )));
            }
            if !(pair[1].mesh() < pair[0].mesh()) {
                return Err(Error::InvalidPartition(format!(
                    "mesh does not decrease between partitions {n} and {}",
                    n + 1
                )));
            }
        }
        Ok(())
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.partitions.iter()
    }
}

/// Uniform partitions with `k = 2^n` steps for `n = n_min..=n_max`.
pub fn dyadic_sequence(horizon: f64, n_min: u32, n_max: u32) -> Result<PartitionSequence> {
    if n_min > n_max {
        return Err(Error::InvalidPartition(format!(
            "empty level range {n_min}..={n_max}"
        )));
    }
    let partitions = (n_min..=n_max)
        .map(|n| {
            if n > MAX_DYADIC_LEVEL {
                return Err(Error::InvalidPartition(format!(
                    "dyadic level {n} exceeds {MAX_DYADIC_LEVEL}"
                )));
            }
            Partition::dyadic(horizon, n, (0..=(1u64 << n)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    PartitionSequence::new(partitions)
}

/// Non-uniform nested sequence of `levels` partitions refined from `{0, T}`.
/// Each refinement bisects every interval of maximal length, then bisects each
/// resulting half, and each shorter interval, with probability 1/2. The mesh
/// at least halves at every step.
pub fn bisection_sequence(horizon: f64, levels: u32, seed: u64) -> Result<PartitionSequence> {
    let max_levels = MAX_DYADIC_LEVEL / 2;
    if levels == 0 || levels > max_levels {
        return Err(Error::InvalidPartition(format!(
            "bisection sequence needs 1..={max_levels} levels, got {levels}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<u64> = vec![0, 1];
    let mut level = 0u32;
    let mut partitions = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let widest = indices.windows(2).map(|w| w[1] - w[0]).max().unwrap();
        let mut next = Vec::with_capacity(indices.len() * 4);
        // Coordinates at level + 2, so quarter points are representable.
        for w in indices.windows(2) {
            let (a, b) = (w[0] << 2, w[1] << 2);
            let mid = (a + b) / 2;
            next.push(a);
            if w[1] - w[0] == widest {
                if rng.random_bool(0.5) {
                    next.push((a + mid) / 2);
                }
                next.push(mid);
                if rng.random_bool(0.5) {
                    next.push((mid + b) / 2);
                }
            } else if rng.random_bool(0.5) {
                next.push(mid);
            }
        }
        next.push(*indices.last().unwrap() << 2);
        indices = next;
        level += 2;
        partitions.push(Partition::dyadic(horizon, level, indices.clone())?);
    }
    PartitionSequence::new(partitions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(
            Partition::uniform(1.0, 2).unwrap().times(),
            &[0.0, 0.5, 1.0]
        );
        assert_eq!(
            Partition::uniform(2.0, 4).unwrap().times(),
            &[0.0, 0.5, 1.0, 1.5, 2.0]
        );
        assert_eq!(Partition::uniform(1.0, 1).unwrap().times(), &[0.0, 1.0]);
        assert!(Partition::uniform(1.0, 0).is_err());
        assert!(Partition::uniform(0.0, 3).is_err());
    }

    #[test]
    fn non_power_of_two_uniform_pins_horizon() {
        let p = Partition::uniform(1.0, 3).unwrap();
        assert_eq!(p.times()[3], 1.0);
        assert!(p.is_uniform());
        assert_eq!(p.dyadic_level(), None);
    }

    #[test]
    fn explicit_validation() {
        assert!(Partition::new(1.0, vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Partition::new(1.0, vec![0.1, 1.0]).is_err());
        assert!(Partition::new(1.0, vec![0.0, 0.9]).is_err());
        assert!(Partition::new(1.0, vec![0.0]).is_err());
        let p = Partition::new(1.0, vec![0.0, 0.3, 1.0]).unwrap();
        assert!(!p.is_uniform());
        assert_eq!(p.mesh(), 0.7);
    }

    #[test]
    fn dyadic_sequence_examples() {
        let seq = dyadic_sequence(1.0, 1, 3).unwrap();
        let ks: Vec<usize> = seq.iter().map(Partition::steps).collect();
        assert_eq!(ks, vec![2, 4, 8]);
        for (n, p) in (1..=3).zip(seq.iter()) {
            assert_eq!(p.mesh(), 2f64.powi(-n));
        }
        assert!(PartitionSequence::check(seq.partitions()).is_ok());
        assert!(dyadic_sequence(1.0, 3, 1).is_err());
    }

    #[test]
    fn nesting_exact_and_fallback() {
        let coarse = Partition::uniform(1.0, 4).unwrap();
        let fine = Partition::uniform(1.0, 8).unwrap();
        assert!(coarse.is_refined_by(&fine));
        assert!(!fine.is_refined_by(&coarse));
        let thirds = Partition::uniform(1.0, 3).unwrap();
        let sixths = Partition::uniform(1.0, 6).unwrap();
        assert!(thirds.is_refined_by(&sixths));
        assert!(!thirds.is_refined_by(&fine));
        let explicit = Partition::new(1.0, vec![0.0, 0.25, 1.0]).unwrap();
        assert!(explicit.is_refined_by(&fine));
        assert!(!fine.is_refined_by(&Partition::uniform(2.0, 8).unwrap()));
    }

    #[test]
    fn sequence_rejects_non_nested_or_flat_mesh() {
        let a = Partition::uniform(1.0, 4).unwrap();
        let b = Partition::uniform(1.0, 3).unwrap();
        assert!(PartitionSequence::new(vec![a.clone(), b]).is_err());
        assert!(PartitionSequence::new(vec![a.clone(), a]).is_err());
        assert!(PartitionSequence::new(vec![]).is_err());
    }

    #[test]
    fn bisection_sequence_is_condensing() {
        for seed in 0..5 {
            let seq = bisection_sequence(2.0, 8, seed).unwrap();
            assert_eq!(seq.len(), 8);
            for (n, p) in seq.iter().enumerate() {
                assert!(p.mesh() <= 2.0 * 2f64.powi(-(n as i32 + 1)));
            }
        }
        let seq = bisection_sequence(1.0, 6, 3).unwrap();
        assert!(seq.iter().skip(1).any(|p| !p.is_uniform()));
    }

    #[test]
    fn index_at_uses_step_convention() {
        let p = Partition::uniform(1.0, 16).unwrap();
        assert_eq!(p.index_at(0.4), Some(6));
        assert_eq!(p.index_at(0.375), Some(6));
        assert_eq!(p.index_at(1.0), Some(16));
        assert_eq!(p.index_at(5.0), Some(16));
        assert_eq!(p.index_at(-0.1), None);
    }
}
