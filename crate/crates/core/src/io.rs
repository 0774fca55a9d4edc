//! Report serialization and the flat `key = value` config file format.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ConvergenceReport, LevelRecord, WeightsDump};

/// Fixed CSV column order.
pub const CSV_HEADER: [&str; 12] = [
    "level",
    "k",
    "mesh",
    "sum_v",
    "var_AT",
    "paper_bound",
    "mc_sup2_mean",
    "mc_sup2_se",
    "mc_sup_mean",
    "mc_sup_se",
    "jacod_T",
    "energy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!(
                "format: expected csv or json, got {other:?}"
            ))),
        }
    }
}

fn csv_err(err: csv::Error) -> Error {
    Error::Io(err.to_string())
}

/// Shortest decimal string that parses back to the same `f64`; empty for `None`.
fn render(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &LevelRecord) -> [String; 12] {
    [
        r.level.to_string(),
        r.k.to_string(),
        render(Some(r.mesh)),
        render(r.sum_v),
        render(r.var_at),
        render(r.paper_bound),
        render(r.mc_sup2_mean),
        render(r.mc_sup2_se),
        render(r.mc_sup_mean),
        render(r.mc_sup_se),
        render(r.jacod_t),
        render(r.energy),
    ]
}

pub fn write_report<W: Write>(report: &ConvergenceReport, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for rec in &report.levels {
                w.write_record(csv_row(rec)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(report, out)?,
    }
    Ok(())
}

pub fn report_bytes(report: &ConvergenceReport, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_report(report, format, &mut buf)?;
    Ok(buf)
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_report_json(text: &str) -> Result<ConvergenceReport> {
    serde_json::from_str(text).map_err(|e| Error::Io(format!("malformed report: {e}")))
}

/// Weights dump: CSV rows `j,t_j,v_j,w_1,...,w_{j-1}` (ragged), or JSON.
pub fn write_weights<W: Write>(dump: &WeightsDump, format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => write_json(dump, out),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
            w.write_record(["j", "t_j", "v_j", "weights"])
                .map_err(csv_err)?;
            for (j, (v, row)) in dump.variances.iter().zip(&dump.weights).enumerate() {
                let mut rec = vec![
                    (j + 1).to_string(),
                    dump.times[j + 1].to_string(),
                    v.to_string(),
                ];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Parses flat `key = value` lines. Blank lines and lines starting with `#`
/// are skipped; keys must be unique.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {}: expected key = value, got {line:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_string();
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!(
                "config line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}
