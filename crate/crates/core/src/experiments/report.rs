use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::experiments::config::ExperimentConfig;
use crate::io::Format;

/// One row of a report: exact quantities and Monte Carlo estimates at one
/// partition level. Columns that an experiment does not compute are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub k: usize,
    pub mesh: f64,
    /// Exact `E(X_T - A_T)^2 = sum_j v_j`.
    pub sum_v: Option<f64>,
    /// Exact `Var(A_T)`.
    #[serde(rename = "var_AT")]
    pub var_at: Option<f64>,
    /// `4 T |theta|^{2H-1}`.
    pub paper_bound: Option<f64>,
    pub mc_sup2_mean: Option<f64>,
    pub mc_sup2_se: Option<f64>,
    pub mc_sup_mean: Option<f64>,
    pub mc_sup_se: Option<f64>,
    #[serde(rename = "jacod_T")]
    pub jacod_t: Option<f64>,
    pub energy: Option<f64>,
    /// Experiment-specific diagnostics (JSON only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl LevelRecord {
    pub fn new(level: u32, k: usize, mesh: f64) -> Self {
        Self {
            level,
            k,
            mesh,
            sum_v: None,
            var_at: None,
            paper_bound: None,
            mc_sup2_mean: None,
            mc_sup2_se: None,
            mc_sup_mean: None,
            mc_sup_se: None,
            jacod_t: None,
            energy: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.get(key).copied()
    }
}

/// A numerically asserted bound and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything needed to re-run an experiment and reproduce its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    /// Serialization the report was written in.
    #[serde(default)]
    pub format: Format,
    /// Wall-clock seconds. Kept out of embedded manifests so that report
    /// bytes depend only on the inputs; recorded in sidecar manifests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_secs: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            format: Format::default(),
            duration_secs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub manifest: RunManifest,
    pub levels: Vec<LevelRecord>,
    pub checks: Vec<Check>,
}

impl ConvergenceReport {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            levels: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Column of optional values across levels, `None` entries skipped.
    pub fn column(&self, f: impl Fn(&LevelRecord) -> Option<f64>) -> Vec<f64> {
        self.levels.iter().filter_map(f).collect()
    }
}
