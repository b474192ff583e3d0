//! CSV and JSON output for sweep reports.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::RatioReport;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct CsvRow<'a> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "R")]
    r: f64,
    log_r: f64,
    q_size: usize,
    sum_m2: f64,
    energy_delta: f64,
    energy_quadrature: f64,
    energy_error_bound: f64,
    delta_vs_quadrature: f64,
    f_norm_sq: f64,
    sup_line_lower: f64,
    mixed_norm_upper: f64,
    ratio_conservative: f64,
    ratio_observed: f64,
    max_bad_set: usize,
    max_plane_count: Option<usize>,
    plane_mode: &'a str,
}

/// Serializes records with a header row.
pub fn csv_string<T: Serialize>(records: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_csv(report: &RatioReport) -> Result<String> {
    csv_string(report.rows.iter().map(|r| CsvRow {
        n: r.n,
        r: r.r,
        log_r: r.log_r,
        q_size: r.q_size,
        sum_m2: r.sum_m2,
        energy_delta: r.energy_delta,
        energy_quadrature: r.energy_quadrature,
        energy_error_bound: r.energy_error_bound,
        delta_vs_quadrature: r.delta_vs_quadrature,
        f_norm_sq: r.f_norm_sq,
        sup_line_lower: r.sup_line_lower,
        mixed_norm_upper: r.mixed_norm_upper,
        ratio_conservative: r.ratio_conservative,
        ratio_observed: r.ratio_observed,
        max_bad_set: r.incidence.max_bad_set,
        max_plane_count: r.incidence.max_plane_count,
        plane_mode: &r.incidence.plane_mode,
    }))
}

pub fn to_json(report: &RatioReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Writes the CSV and JSON files named in the config under `out_dir`.
pub fn write_report(report: &RatioReport, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(&report.config.csv_name);
    let json = out_dir.join(&report.config.json_name);
    std::fs::write(&csv, to_csv(report)?)?;
    std::fs::write(&json, to_json(report)? + "\n")?;
    Ok((csv, json))
}
