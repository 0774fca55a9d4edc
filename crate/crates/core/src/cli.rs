//! Command-line front end.
//!
//! Exit codes: 0 when every asserted bound held, 1 when an experiment ran but
//! a bound failed numerically, 2 on usage or configuration errors, 3 when the
//! run itself failed (I/O, factorization).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    weights_dump, ConvergenceReport, Experiment, ExperimentConfig, LevelRange, RunManifest,
};
use crate::io::{parse_config_file, write_json, write_report, write_weights, Format};
use crate::model::HurstIndex;

/// Default output directory when `--output` is absent. Without it reports go
/// to standard output.
pub const OUTPUT_DIR_ENV: &str = "LOCAL_PREDICTOR_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "local-predictor",
    version,
    about = "Discrete compensators of fractional Brownian motion on condensing partitions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H > 1/2: Doob-inequality chain and shrinking sup deviations.
    Converge(RunArgs),
    /// H < 1/2: growing terminal compensator variance.
    Explode(RunArgs),
    /// H = 1/2: compensator identically zero.
    Martingale(RunArgs),
    /// H > 1/2: expected quadratic variation tends to zero.
    Energy(RunArgs),
    /// Cumulative conditional variance at the horizon.
    Jacod(RunArgs),
    /// Squared Brownian motion compensator and Cesàro means.
    Doobmeyer(RunArgs),
    /// Dump predictor weights and innovation variances at the finest level.
    Weights(RunArgs),
    /// Re-run an experiment from a JSON report or manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Hurst index in (0, 1).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Horizon T (default 1).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Dyadic levels `n_min:n_max`; grids have 2^n steps.
    #[arg(long)]
    pub levels: Option<String>,
    /// Monte Carlo paths per level (default 10000).
    #[arg(long)]
    pub paths: Option<usize>,
    /// Seed (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Opt-in diagonal regularization of the covariance.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Cap on the 95th percentile of sup |X - A| at the finest level (default 0.35).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Allow grids with more than 4096 steps.
    #[arg(long)]
    pub allow_large: bool,
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
    /// Output file (default: standard output, or $LOCAL_PREDICTOR_OUTPUT_DIR/<command>.<ext>).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// JSON report (with an embedded manifest) or a manifest file.
    pub source: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Default Hurst index and level range per subcommand.
fn defaults(command: &str) -> (f64, LevelRange) {
    let (h, lo, hi) = match command {
        "explode" => (0.25, 4, 10),
        "martingale" | "doobmeyer" => (0.5, 1, 6),
        _ => (0.75, 4, 10),
    };
    (h, LevelRange { min: lo, max: hi })
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn apply_setting(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "hurst" => {
            cfg.hurst = HurstIndex::new(parse_value(key, value)?)
                .map_err(|e| Error::Config(format!("hurst: {e}")))?
        }
        "horizon" => cfg.horizon = parse_value(key, value)?,
        "levels" => cfg.levels = value.parse()?,
        "paths" => cfg.n_paths = parse_value(key, value)?,
        "seed" => cfg.seed = parse_value(key, value)?,
        "ridge" => cfg.ridge = Some(parse_value(key, value)?),
        "epsilon" => cfg.sup_epsilon = parse_value(key, value)?,
        "allow_large" => cfg.allow_large = parse_value(key, value)?,
        other => return Err(Error::Config(format!("unknown config key {other:?}"))),
    }
    Ok(())
}

/// Resolves the effective configuration: subcommand defaults, then the config
/// file (if any), then flags.
pub fn resolve_config(
    command: &str,
    args: &RunArgs,
    file_text: Option<&str>,
) -> Result<(ExperimentConfig, Format)> {
    let (h, levels) = defaults(command);
    let mut cfg = ExperimentConfig::new(HurstIndex::new(h)?, levels);
    let mut format = Format::default();
    if let Some(text) = file_text {
        for (key, value) in parse_config_file(text)? {
            if key == "format" {
                format = value.parse()?;
            } else {
                apply_setting(&mut cfg, &key, &value)?;
            }
        }
    }
    if let Some(h) = args.hurst {
        apply_setting(&mut cfg, "hurst", &h.to_string())?;
    }
    if let Some(x) = args.horizon {
        cfg.horizon = x;
    }
    if let Some(levels) = &args.levels {
        cfg.levels = levels.parse()?;
    }
    if let Some(n) = args.paths {
        cfg.n_paths = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.ridge {
        cfg.ridge = Some(r);
    }
    if let Some(eps) = args.epsilon {
        cfg.sup_epsilon = eps;
    }
    if args.allow_large {
        cfg.allow_large = true;
    }
    if let Some(f) = args.format {
        format = f;
    }
    cfg.validate()?;
    Ok((cfg, format))
}

/// Parses an argument list (program name first) into a subcommand name,
/// configuration and output format. Replay is not a configuration and is
/// rejected here.
pub fn parse_config<I, T>(args: I) -> Result<(String, ExperimentConfig, Format)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    let (name, run) = split_command(&cli.command)
        .ok_or_else(|| Error::Config("replay takes a manifest, not a configuration".into()))?;
    let text =
        match &run.config {
            Some(path) => Some(fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("config: cannot read {}: {e}", path.display()))
            })?),
            None => None,
        };
    let (cfg, format) = resolve_config(name, run, text.as_deref())?;
    Ok((name.to_string(), cfg, format))
}

fn split_command(command: &Command) -> Option<(&'static str, &RunArgs)> {
    Some(match command {
        Command::Converge(a) => ("converge", a),
        Command::Explode(a) => ("explode", a),
        Command::Martingale(a) => ("martingale", a),
        Command::Energy(a) => ("energy", a),
        Command::Jacod(a) => ("jacod", a),
        Command::Doobmeyer(a) => ("doobmeyer", a),
        Command::Weights(a) => ("weights", a),
        Command::Replay(_) => return None,
    })
}

/// Runs an experiment and stamps the output format into its manifest.
pub fn execute(command: &str, cfg: &ExperimentConfig, format: Format) -> Result<ConvergenceReport> {
    let mut report = Experiment::from_name(command)?.run(cfg)?;
    report.manifest.format = format;
    Ok(report)
}

fn output_target(explicit: Option<&Path>, command: &str, format: Format) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{command}.{}", format.extension())))
    })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn emit(
    report: &ConvergenceReport,
    format: Format,
    target: Option<&Path>,
    duration_secs: f64,
) -> Result<()> {
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            write_report(report, format, &mut file)?;
            file.flush()?;
            let mut manifest = report.manifest.clone();
            manifest.duration_secs = Some(duration_secs);
            let sidecar = fs::File::create(sidecar_path(path))?;
            write_json(&manifest, io::BufWriter::new(sidecar))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_report(report, format, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn summarize_checks(report: &ConvergenceReport, duration_secs: f64) {
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("{tag} {}: {}", c.name, c.detail);
    }
    eprintln!(
        "{}: {} checks, {} failed, {duration_secs:.2}s",
        report.manifest.command,
        report.checks.len(),
        report.failed().count()
    );
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidHurst(_) | Error::InvalidPartition(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Reads a manifest from a JSON report (its `manifest` field) or a bare manifest.
pub fn read_manifest(text: &str) -> Result<RunManifest> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("replay: {e}")))?;
    let manifest = match value.get("manifest") {
        Some(m) => m.clone(),
        None => value,
    };
    serde_json::from_value(manifest).map_err(|e| Error::Config(format!("replay: {e}")))
}

fn run_experiment(
    command: &str,
    cfg: &ExperimentConfig,
    format: Format,
    output: Option<&Path>,
) -> Result<i32> {
    let start = Instant::now();
    let report = execute(command, cfg, format)?;
    let secs = start.elapsed().as_secs_f64();
    let target = output_target(output, command, format);
    emit(&report, format, target.as_deref(), secs)?;
    summarize_checks(&report, secs);
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Replay(args) => {
            let text = fs::read_to_string(&args.source).map_err(|e| {
                Error::Config(format!(
                    "replay: cannot read {}: {e}",
                    args.source.display()
                ))
            })?;
            let manifest = read_manifest(&text)?;
            manifest.config.validate()?;
            run_experiment(
                &manifest.command,
                &manifest.config,
                manifest.format,
                args.output.as_deref(),
            )
        }
        command => {
            let (name, run) = split_command(command).expect("not replay");
            let text = match &run.config {
                Some(path) => Some(fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("config: cannot read {}: {e}", path.display()))
                })?),
                None => None,
            };
            let (cfg, format) = resolve_config(name, run, text.as_deref())?;
            if name == "weights" {
                let dump = weights_dump(&cfg)?;
                match output_target(run.output.as_deref(), name, format) {
                    Some(path) => {
                        write_weights(&dump, format, io::BufWriter::new(fs::File::create(path)?))?
                    }
                    None => write_weights(&dump, format, io::stdout().lock())?,
                }
                return Ok(EXIT_OK);
            }
            run_experiment(name, &cfg, format, run.output.as_deref())
        }
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
