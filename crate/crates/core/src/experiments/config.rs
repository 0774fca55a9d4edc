use serde::{Deserialize, Serialize};

use crate::engine::predictor::{EngineOptions, FactorMethod};
use crate::error::{Error, Result};
use crate::model::HurstIndex;

/// Largest grid size allowed without `allow_large`.
pub const MAX_STEPS: usize = 4096;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_SUP_EPSILON: f64 = 0.35;

/// Inclusive range of dyadic levels `n`, giving grids with `2^n` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub min: u32,
    pub max: u32,
}

impl LevelRange {
    pub fn new(min: u32, max: u32) -> Result<Self> {
        if min > max {
            return Err(Error::Config(format!("levels: empty range {min}:{max}")));
        }
        Ok(Self { min, max })
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.min..=self.max
    }

    pub fn len(self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

impl std::str::FromStr for LevelRange {
    type Err = Error;

    /// `"a:b"` or a single level `"a"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("levels: cannot parse {s:?} as n_min:n_max")))
        };
        match s.split_once(':') {
            Some((a, b)) => Self::new(parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                Self::new(n, n)
            }
        }
    }
}

impl std::fmt::Display for LevelRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub hurst: HurstIndex,
    pub horizon: f64,
    pub levels: LevelRange,
    pub n_paths: usize,
    pub seed: u64,
    /// Opt-in diagonal regularization; absent by default.
    #[serde(default)]
    pub ridge: Option<f64>,
    /// Cap on the 95th percentile of the sup deviation at the finest level.
    pub sup_epsilon: f64,
    /// Lifts the `2^n_max <= 4096` guard.
    #[serde(default)]
    pub allow_large: bool,
}

impl ExperimentConfig {
    pub fn new(hurst: HurstIndex, levels: LevelRange) -> Self {
        Self {
            hurst,
            horizon: 1.0,
            levels,
            n_paths: DEFAULT_PATHS,
            seed: DEFAULT_SEED,
            ridge: None,
            sup_epsilon: DEFAULT_SUP_EPSILON,
            allow_large: false,
        }
    }

    pub fn with_paths(mut self, n_paths: usize) -> Self {
        self.n_paths = n_paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon: must be positive, got {}",
                self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("paths: must be at least 1".into()));
        }
        if self.levels.min > self.levels.max {
            return Err(Error::Config(format!(
                "levels: empty range {}",
                self.levels
            )));
        }
        let too_large =
            self.levels.max >= usize::BITS - 1 || (1usize << self.levels.max) > MAX_STEPS;
        if too_large && !self.allow_large {
            return Err(Error::Config(format!(
                "levels: 2^{} steps exceeds the guard of {MAX_STEPS} (pass allow_large to override)",
                self.levels.max
            )));
        }
        if self.levels.max > 52 {
            return Err(Error::Config(format!(
                "levels: level {} exceeds 52",
                self.levels.max
            )));
        }
        if let Some(r) = self.ridge {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Config(format!(
                    "ridge: must be non-negative, got {r}"
                )));
            }
        }
        if !(self.sup_epsilon.is_finite() && self.sup_epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon: must be positive, got {}",
                self.sup_epsilon
            )));
        }
        Ok(())
    }

    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            method: FactorMethod::Auto,
            ridge: self.ridge,
        }
    }
}
