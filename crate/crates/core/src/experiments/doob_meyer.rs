//! Squared Brownian motion `X = B^2`, a submartingale whose Doob-Meyer
//! compensator is `A_t = t`.
//!
//! Conditioning on the Brownian grid values, `E(B_{t_j}^2 - B_{t_{j-1}}^2 | past)
//! = E(2 B_{t_{j-1}} dB_j + dB_j^2) = dt_j`, so the discrete compensator is the
//! deterministic step function `A_t = t_j` on `[t_j, t_{j+1})`. Unlike the
//! centered fBm case, `A_{t_1} = t_1` is not zero.

use rayon::prelude::*;

use crate::compensator::{cesaro_average, StepPath};
use crate::engine::predictor::GaussianEngine;
use crate::engine::sampling::PathSampler;
use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::monte_carlo::{path_stats, summarize, PathStats};
use crate::experiments::report::{ConvergenceReport, RunManifest};
use crate::experiments::{require, Experiment, LevelRecord, MC_BANDS};
use crate::model::{GaussianIncrementModel, HurstIndex};
use crate::partition::{dyadic_sequence, Partition};
use crate::stats::Estimate;

/// Probe points per finest-grid step when measuring step-function errors.
pub const PROBE_REFINEMENT: usize = 10;

/// `E(B_t^2 - B_s^2 | B_s) = t - s`, independent of the observed value.
pub fn squared_bm_increment_expectation(_b_prev: f64, dt: f64) -> f64 {
    dt
}

/// Cumulative conditional expectations of the increments of `B^2`.
pub fn squared_bm_compensator(partition: &Partition) -> StepPath {
    let mut values = Vec::with_capacity(partition.times().len());
    let mut acc = 0.0;
    values.push(acc);
    for dt in partition.step_lengths() {
        acc += squared_bm_increment_expectation(0.0, dt);
        values.push(acc);
    }
    StepPath::new(partition.clone(), values).expect("one value per grid point")
}

struct SquaredPathStats {
    stats: PathStats,
    /// `M_T = sum_j dM_j`.
    terminal_m: f64,
    /// `sum_j dM_j B_{t_{j-1}}`, a martingale transform with mean zero.
    transform: f64,
}

fn simulate_squared(
    engine: &GaussianEngine,
    compensator: &StepPath,
    n_paths: usize,
    seed: u64,
) -> Vec<SquaredPathStats> {
    let k = engine.model().steps();
    let a = compensator.values();
    (0..n_paths as u64)
        .into_par_iter()
        .map_init(
            || {
                (
                    PathSampler::new(engine.factor(), seed),
                    vec![0.0; k],
                    vec![0.0; k + 1],
                )
            },
            |(sampler, db, x), i| {
                sampler.sample_into(i, db);
                let mut b = 0.0;
                let mut transform = 0.0;
                x[0] = 0.0;
                for j in 0..k {
                    let b_prev = b;
                    b += db[j];
                    x[j + 1] = b * b;
                    let dm = (x[j + 1] - x[j]) - (a[j + 1] - a[j]);
                    transform += dm * b_prev;
                }
                let stats = path_stats(x, a);
                SquaredPathStats {
                    stats,
                    terminal_m: x[k] - a[k],
                    transform,
                }
            },
        )
        .collect()
}

/// Deterministic compensators of `B^2` along the dyadic levels, their distance
/// to `t`, Cesàro means across levels, and a Monte Carlo check that `B^2 - A`
/// behaves as a martingale.
pub fn run_doob_meyer_demo(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let h = cfg.hurst.value();
    require(cfg.hurst.is_brownian(), || {
        format!("hurst: doobmeyer is built from Brownian samples and needs H = 1/2, got {h}")
    })?;
    cfg.validate()?;
    let mut report = ConvergenceReport::new(RunManifest::new(Experiment::DoobMeyer.name(), cfg));
    let seq = dyadic_sequence(cfg.horizon, cfg.levels.min, cfg.levels.max)?;
    let probe = Partition::uniform(cfg.horizon, PROBE_REFINEMENT << cfg.levels.max)?;
    let coarsest_mesh = seq.partitions()[0].mesh();
    let mut compensators: Vec<StepPath> = Vec::new();
    let mut cesaro_worst = 0.0f64;

    for (level, partition) in cfg.levels.iter().zip(seq.iter()) {
        let comp = squared_bm_compensator(partition);
        let mesh = partition.mesh();
        let mut rec = LevelRecord::new(level, partition.steps(), mesh);
        rec.var_at = Some(0.0);

        let step_error = probe
            .times()
            .iter()
            .map(|&t| (comp.value_at(t) - t).abs())
            .fold(0.0, f64::max);
        report.check(
            format!("compensator_is_grid_step[n={level}]"),
            step_error <= mesh,
            format!("sup_t |A_t - t| = {step_error:e} vs mesh {mesh:e}"),
        );
        let a_t = *comp.values().last().unwrap();
        report.check(
            format!("compensator_terminal[n={level}]"),
            (a_t - cfg.horizon).abs() <= 1e-12 * cfg.horizon,
            format!("A_T = {a_t} vs T = {}", cfg.horizon),
        );

        compensators.push(comp.clone());
        let cesaro_error = probe
            .times()
            .iter()
            .map(|&t| cesaro_average(&compensators, t).map(|b| (b - t).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cesaro_worst = cesaro_worst.max(cesaro_error);

        let engine = GaussianEngine::new(
            GaussianIncrementModel::fbm(HurstIndex::brownian(), partition.clone()),
            &cfg.engine_options(),
        )?;
        let sampled = simulate_squared(&engine, &comp, cfg.n_paths, cfg.seed);
        let stats: Vec<PathStats> = sampled.iter().map(|s| s.stats).collect();
        let summary = summarize(&stats);
        let terminal = Estimate::from_iter(sampled.iter().map(|s| s.terminal_m));
        let transform = Estimate::from_iter(sampled.iter().map(|s| s.transform));
        report.check(
            format!("martingale_mean[n={level}]"),
            terminal.within(0.0, MC_BANDS),
            format!("mean M_T = {:.3e} (se {:.2e})", terminal.mean, terminal.se),
        );
        report.check(
            format!("martingale_transform[n={level}]"),
            transform.within(0.0, MC_BANDS),
            format!(
                "mean sum dM_j B_(j-1) = {:.3e} (se {:.2e})",
                transform.mean, transform.se
            ),
        );

        rec.mc_sup2_mean = Some(summary.sup2.mean);
        rec.mc_sup2_se = Some(summary.sup2.se);
        rec.mc_sup_mean = Some(summary.sup.mean);
        rec.mc_sup_se = Some(summary.sup.se);
        let extras = [
            ("step_error_max", step_error),
            ("cesaro_error_max", cesaro_error),
            ("mc_terminal_m_mean", terminal.mean),
            ("mc_terminal_m_se", terminal.se),
            ("mc_transform_mean", transform.mean),
            ("mc_transform_se", transform.se),
        ];
        for (key, value) in extras {
            rec.extras.insert(key.to_string(), value);
        }
        report.levels.push(rec);
    }
    report.check(
        "cesaro_within_coarsest_mesh",
        cesaro_worst <= coarsest_mesh,
        format!("max_t |B^N_t - t| = {cesaro_worst:e} vs coarsest mesh {coarsest_mesh:e}"),
    );
    Ok(report)
}
