//! Experiment runners. Each walks a dyadic sequence of uniform partitions,
//! computes the exact second-moment quantities per level, estimates the
//! path-dependent ones by Monte Carlo, and records every asserted bound as a
//! [`Check`](report::Check).
//!
//! All levels use the same seed, so path `i` at a finer level is drawn from
//! the same random stream as path `i` at a coarser one.

pub mod config;
pub mod doob_meyer;
pub mod monte_carlo;
pub mod report;
pub mod variational;

use serde::Serialize;

use crate::compensator::jacod_sum;
use crate::engine::predictor::GaussianEngine;
use crate::error::{Error, Result};
use crate::model::GaussianIncrementModel;
use crate::partition::{dyadic_sequence, Partition};

pub use config::{ExperimentConfig, LevelRange};
pub use doob_meyer::run_doob_meyer_demo;
pub use report::{Check, ConvergenceReport, LevelRecord, RunManifest};
pub use variational::{variational_check, VariationalCheck};

/// Width of Monte Carlo acceptance bands, in standard errors.
pub const MC_BANDS: f64 = 4.0;
/// Slack for exact inequalities evaluated in floating point.
pub const EXACT_SLACK: f64 = 1e-10;

/// The experiments addressable by name (CLI subcommands and manifests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Converge,
    Explode,
    Martingale,
    Energy,
    Jacod,
    DoobMeyer,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Converge,
        Experiment::Explode,
        Experiment::Martingale,
        Experiment::Energy,
        Experiment::Jacod,
        Experiment::DoobMeyer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Converge => "converge",
            Experiment::Explode => "explode",
            Experiment::Martingale => "martingale",
            Experiment::Energy => "energy",
            Experiment::Jacod => "jacod",
            Experiment::DoobMeyer => "doobmeyer",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown experiment {name:?}")))
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
        match self {
            Experiment::Converge => run_uniform_convergence(cfg),
            Experiment::Explode => run_explosion(cfg),
            Experiment::Martingale => run_martingale_null(cfg),
            Experiment::Energy => run_energy_zero(cfg),
            Experiment::Jacod => run_jacod(cfg),
            Experiment::DoobMeyer => run_doob_meyer_demo(cfg),
        }
    }
}

struct Level {
    level: u32,
    partition: Partition,
    engine: GaussianEngine,
}

fn levels(cfg: &ExperimentConfig) -> Result<Vec<Level>> {
    cfg.validate()?;
    let seq = dyadic_sequence(cfg.horizon, cfg.levels.min, cfg.levels.max)?;
    cfg.levels
        .iter()
        .zip(seq.iter())
        .map(|(level, partition)| {
            let model = GaussianIncrementModel::fbm(cfg.hurst, partition.clone());
            let engine = GaussianEngine::new(model, &cfg.engine_options())?;
            Ok(Level {
                level,
                partition: partition.clone(),
                engine,
            })
        })
        .collect()
}

/// `T |theta|^{2H-1}`: equals the energy on uniform grids, bounds it from
/// above for `H > 1/2` and from below for `H < 1/2` on any grid.
fn energy_scale(cfg: &ExperimentConfig, partition: &Partition) -> f64 {
    cfg.horizon * partition.mesh().powf(2.0 * cfg.hurst.value() - 1.0)
}

fn exact_record(cfg: &ExperimentConfig, lvl: &Level) -> Result<LevelRecord> {
    let p = &lvl.partition;
    let mut rec = LevelRecord::new(lvl.level, p.steps(), p.mesh());
    rec.sum_v = Some(lvl.engine.profile().total());
    rec.var_at = Some(lvl.engine.terminal_compensator_variance());
    rec.paper_bound = Some(4.0 * energy_scale(cfg, p));
    rec.jacod_t = Some(jacod_sum(lvl.engine.profile(), cfg.horizon)?);
    rec.energy = Some(lvl.engine.model().analytic_energy());
    Ok(rec)
}

fn monte_carlo_record(
    cfg: &ExperimentConfig,
    lvl: &Level,
) -> Result<(LevelRecord, monte_carlo::BatchSummary)> {
    let mut rec = exact_record(cfg, lvl)?;
    let stats = monte_carlo::simulate(&lvl.engine, cfg.n_paths, cfg.seed);
    let s = monte_carlo::summarize(&stats);
    rec.mc_sup2_mean = Some(s.sup2.mean);
    rec.mc_sup2_se = Some(s.sup2.se);
    rec.mc_sup_mean = Some(s.sup.mean);
    rec.mc_sup_se = Some(s.sup.se);
    let extras = [
        ("mc_sup_q95", s.sup_q95),
        ("mc_var_at", s.var_terminal_a.mean),
        ("mc_var_at_se", s.var_terminal_a.se),
        ("mc_qv_mean", s.qv.mean),
        ("mc_qv_se", s.qv.se),
        ("mc_qv_martingale_mean", s.qv_martingale.mean),
        ("mc_qv_martingale_se", s.qv_martingale.se),
    ];
    for (key, value) in extras {
        rec.extras.insert(key.to_string(), value);
    }
    Ok((rec, s))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn strictly_monotone(xs: &[f64], increasing: bool) -> bool {
    xs.windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn fmt_values(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Compensators of fBm with `H > 1/2` along dyadic partitions: the Doob
/// inequality chain `E sup (X - A)^2 <= 4 sum v_j <= 4 T |theta|^{2H-1}` per
/// level, and shrinking sup deviations across levels.
pub fn run_uniform_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    require(h > 0.5, || {
        format!("hurst: converge needs H > 1/2, got {h}")
    })?;
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::Converge.name(), cfg));
    let mut sup2 = Vec::new();
    let mut sup = Vec::new();
    let mut q95 = Vec::new();
    for lvl in levels(cfg)? {
        let (rec, s) = monte_carlo_record(cfg, &lvl)?;
        let sum_v = rec.sum_v.unwrap();
        let scale = energy_scale(cfg, &lvl.partition);
        report.check(
            format!("doob_inequality[n={}]", lvl.level),
            s.sup2.mean <= 4.0 * sum_v + MC_BANDS * s.sup2.se,
            format!(
                "E sup (X-A)^2 = {:.6} (se {:.2e}) vs 4 sum v = {:.6}",
                s.sup2.mean,
                s.sup2.se,
                4.0 * sum_v
            ),
        );
        report.check(
            format!("innovation_sum_bound[n={}]", lvl.level),
            sum_v <= scale + EXACT_SLACK,
            format!("sum v = {sum_v:.6e} vs T|theta|^(2H-1) = {scale:.6e}"),
        );
        sup2.push(s.sup2);
        sup.push(s.sup);
        q95.push(s.sup_q95);
        report.levels.push(rec);
    }
    let drifts_down = |xs: &[crate::stats::Estimate]| {
        xs.windows(2).all(|w| {
            let band = 2.0 * (w[0].se * w[0].se + w[1].se * w[1].se).sqrt();
            w[1].mean <= w[0].mean + band
        })
    };
    report.check(
        "sup2_mean_decreasing",
        drifts_down(&sup2),
        fmt_values(&sup2.iter().map(|e| e.mean).collect::<Vec<_>>()),
    );
    report.check(
        "sup_mean_decreasing",
        drifts_down(&sup),
        fmt_values(&sup.iter().map(|e| e.mean).collect::<Vec<_>>()),
    );
    let sums = report.column(|r| r.sum_v);
    report.check(
        "innovation_sum_decreasing",
        strictly_monotone(&sums, false),
        fmt_values(&sums),
    );
    report.check(
        "sup_q95_decreasing",
        strictly_monotone(&q95, false),
        fmt_values(&q95),
    );
    let last = *q95.last().unwrap();
    report.check(
        "sup_q95_below_epsilon",
        last <= cfg.sup_epsilon,
        format!("q95 = {last:.6} vs epsilon = {}", cfg.sup_epsilon),
    );
    Ok(report)
}

/// Energy zero for `H > 1/2`: Monte Carlo `E[X]_T` against the closed form,
/// which equals `T |theta|^{2H-1}` and decreases with the level.
pub fn run_energy_zero(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    require(h > 0.5, || format!("hurst: energy needs H > 1/2, got {h}"))?;
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::Energy.name(), cfg));
    for lvl in levels(cfg)? {
        let (rec, s) = monte_carlo_record(cfg, &lvl)?;
        let energy = rec.energy.unwrap();
        let scale = energy_scale(cfg, &lvl.partition);
        report.check(
            format!("energy_monte_carlo[n={}]", lvl.level),
            s.qv.within(energy, MC_BANDS),
            format!(
                "mean [X]_T = {:.6} (se {:.2e}) vs {energy:.6}",
                s.qv.mean, s.qv.se
            ),
        );
        report.check(
            format!("energy_closed_form[n={}]", lvl.level),
            (energy - scale).abs() <= 1e-12 * scale,
            format!("{energy:.12} vs T|theta|^(2H-1) = {scale:.12}"),
        );
        report.levels.push(rec);
    }
    let energies = report.column(|r| r.energy);
    report.check(
        "energy_decreasing",
        strictly_monotone(&energies, false),
        fmt_values(&energies),
    );
    Ok(report)
}

/// Brownian motion: predictor weights, `Var(A_T)` and every sampled
/// compensator vanish.
pub fn run_martingale_null(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    require(cfg.hurst.is_brownian(), || {
        format!("hurst: martingale needs H = 1/2, got {h}")
    })?;
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::Martingale.name(), cfg));
    for lvl in levels(cfg)? {
        let (mut rec, s) = monte_carlo_record(cfg, &lvl)?;
        let w_max = lvl.engine.weights().max_abs();
        let var_at = rec.var_at.unwrap();
        rec.extras.insert("weights_max_abs".into(), w_max);
        rec.extras
            .insert("mc_sup_abs_a_max".into(), s.sup_abs_a_max);
        report.check(
            format!("weights_vanish[n={}]", lvl.level),
            w_max <= EXACT_SLACK,
            format!("max |W| = {w_max:e}"),
        );
        report.check(
            format!("terminal_variance_vanishes[n={}]", lvl.level),
            var_at <= 1e-16,
            format!("Var(A_T) = {var_at:e}"),
        );
        report.check(
            format!("sampled_compensators_vanish[n={}]", lvl.level),
            s.sup_abs_a_max <= EXACT_SLACK,
            format!("max over paths of sup |A| = {:e}", s.sup_abs_a_max),
        );
        report.levels.push(rec);
    }
    Ok(report)
}

/// fBm with `H < 1/2`: `E(X_T - A_T)^2 = sum v_j` is bounded below by half the
/// energy, so `Var(A_T)` grows without bound along the sequence.
pub fn run_explosion(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    require(h < 0.5, || format!("hurst: explode needs H < 1/2, got {h}"))?;
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::Explode.name(), cfg));
    let terminal_sd = cfg.horizon.powf(h);
    for lvl in levels(cfg)? {
        let (rec, s) = monte_carlo_record(cfg, &lvl)?;
        let sum_v = rec.sum_v.unwrap();
        let var_at = rec.var_at.unwrap();
        let half_energy = 0.5 * rec.energy.unwrap();
        report.check(
            format!("innovation_lower_bound[n={}]", lvl.level),
            sum_v >= half_energy - 1e-8,
            format!("sum v = {sum_v:.6} vs 1/2 sum dt^(2H) = {half_energy:.6}"),
        );
        let hq = cfg.hurst;
        let per_step = lvl
            .engine
            .profile()
            .variances()
            .iter()
            .zip(lvl.partition.step_lengths())
            .all(|(v, dt)| *v >= 0.5 * hq.power(dt) - 1e-12);
        report.check(
            format!("conditional_variance_floor[n={}]", lvl.level),
            per_step,
            "v_j >= 1/2 dt_j^(2H) for every step",
        );
        let gap = sum_v.sqrt() - terminal_sd;
        if gap > 0.0 {
            let floor = gap * gap;
            report.check(
                format!("terminal_variance_floor[n={}]", lvl.level),
                var_at >= floor * (1.0 - 1e-8),
                format!("Var(A_T) = {var_at:.6} vs (sqrt(sum v) - T^H)^2 = {floor:.6}"),
            );
        }
        report.check(
            format!("terminal_variance_monte_carlo[n={}]", lvl.level),
            s.var_terminal_a.within(var_at, MC_BANDS),
            format!(
                "sample Var(A_T) = {:.6} (se {:.2e}) vs exact {var_at:.6}",
                s.var_terminal_a.mean, s.var_terminal_a.se
            ),
        );
        report.levels.push(rec);
    }
    let vars = report.column(|r| r.var_at);
    report.check(
        "terminal_variance_increasing",
        strictly_monotone(&vars, true),
        fmt_values(&vars),
    );
    Ok(report)
}

/// Cumulative conditional variance at `T` per level: tends to 0 for `H > 1/2`,
/// equals `T` for `H = 1/2`, diverges for `H < 1/2`. Exact, no sampling.
pub fn run_jacod(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::Jacod.name(), cfg));
    for lvl in levels(cfg)? {
        let rec = exact_record(cfg, &lvl)?;
        let jacod = rec.jacod_t.unwrap();
        let scale = energy_scale(cfg, &lvl.partition);
        let name = format!("jacod_bound[n={}]", lvl.level);
        if h > 0.5 {
            report.check(
                name,
                jacod <= scale + EXACT_SLACK,
                format!("{jacod:.6e} <= T|theta|^(2H-1) = {scale:.6e}"),
            );
        } else if h < 0.5 {
            report.check(
                name,
                jacod >= 0.5 * scale - 1e-8,
                format!("{jacod:.6} >= 1/2 T|theta|^(2H-1) = {:.6}", 0.5 * scale),
            );
        } else {
            report.check(
                name,
                (jacod - cfg.horizon).abs() <= 1e-12 * cfg.horizon,
                format!("{jacod} == T = {}", cfg.horizon),
            );
        }
        report.levels.push(rec);
    }
    let sums = report.column(|r| r.jacod_t);
    if h != 0.5 {
        report.check(
            if h > 0.5 {
                "jacod_decreasing"
            } else {
                "jacod_increasing"
            },
            strictly_monotone(&sums, h < 0.5),
            fmt_values(&sums),
        );
    }
    Ok(report)
}

/// Predictor weights and innovation variances on one uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightsDump {
    pub hurst: f64,
    pub horizon: f64,
    pub k: usize,
    pub times: Vec<f64>,
    pub variances: Vec<f64>,
    /// Row `j` holds the `j` coefficients on the earlier increments.
    pub weights: Vec<Vec<f64>>,
}

/// Weights for the finest level of the configured range.
pub fn weights_dump(cfg: &ExperimentConfig) -> Result<WeightsDump> {
    cfg.validate()?;
    let partition = Partition::uniform(cfg.horizon, 1usize << cfg.levels.max)?;
    let engine = GaussianEngine::new(
        GaussianIncrementModel::fbm(cfg.hurst, partition.clone()),
        &cfg.engine_options(),
    )?;
    let k = partition.steps();
    Ok(WeightsDump {
        hurst: cfg.hurst.value(),
        horizon: cfg.horizon,
        k,
        times: partition.times().to_vec(),
        variances: engine.profile().variances().to_vec(),
        weights: (0..k).map(|j| engine.weights().row(j).to_vec()).collect(),
    })
}
