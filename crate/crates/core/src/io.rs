//! Deterministic CSV and JSON output, and the `key = value` config format.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips an `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analysis::{ConvergenceReport, DispersionTable};
use crate::error::{Error, Result};
use crate::lattice::{BravaisField, TriangularField};
use crate::spin::Spinor;

pub const FIELD_HEADER: [&str; 6] = ["i", "j", "re_up", "im_up", "re_down", "im_down"];
pub const TRIANGULAR_FIELD_HEADER: [&str; 7] = ["i", "j", "k", "re_up", "im_up", "re_down", "im_down"];
pub const SUMMARY_HEADER: [&str; 7] = ["step", "time", "norm", "norm_drift", "mean_x", "mean_y", "spread"];
pub const CONVERGENCE_HEADER: [&str; 4] = ["eps", "l2_error", "n", "steps"];
pub const DISPERSION_HEADER: [&str; 6] =
    ["kx", "ky", "theta_plus", "theta_minus", "omega_continuum_plus", "omega_continuum_minus"];

/// Round-trip float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn spinor_cols(s: &Spinor<f64>) -> [String; 4] {
    [fmt_f64(s.up.re), fmt_f64(s.up.im), fmt_f64(s.down.re), fmt_f64(s.down.im)]
}

/// One row per site, row-major in `(i, j)`.
pub fn write_field_csv(path: &Path, field: &BravaisField<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FIELD_HEADER).map_err(csv_err)?;
    for ((i, j), s) in field.shape.sites().zip(&field.data) {
        let [a, b, c, d] = spinor_cols(s);
        w.write_record([i.to_string(), j.to_string(), a, b, c, d]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per edge, ordered by `(i, j, k)`.
pub fn write_triangular_field_csv(path: &Path, field: &TriangularField<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRIANGULAR_FIELD_HEADER).map_err(csv_err)?;
    for (i, j) in field.shape.sites() {
        for k in 0..3 {
            let [a, b, c, d] = spinor_cols(&field.get(i, j, k));
            w.write_record([i.to_string(), j.to_string(), k.to_string(), a, b, c, d]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    /// `norm − initial norm`.
    pub norm_drift: f64,
    pub mean: [f64; 2],
    pub spread: f64,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            fmt_f64(r.time),
            fmt_f64(r.norm),
            fmt_f64(r.norm_drift),
            fmt_f64(r.mean[0]),
            fmt_f64(r.mean[1]),
            fmt_f64(r.spread),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CONVERGENCE_HEADER).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([fmt_f64(r.eps), fmt_f64(r.l2_error), r.n.to_string(), r.steps.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvergenceSummary<'a> {
    walk: &'a str,
    fitted_order: Option<f64>,
    fit_residual: Option<f64>,
    eps: Vec<f64>,
    l2_error: Vec<f64>,
}

/// JSON with the fitted order and residual; `null` when no fit exists.
pub fn write_convergence_json(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let summary = ConvergenceSummary {
        walk: report.walk.name(),
        fitted_order: report.fitted_order,
        fit_residual: report.fit_residual,
        eps: report.rows.iter().map(|r| r.eps).collect(),
        l2_error: report.rows.iter().map(|r| r.l2_error).collect(),
    };
    write_json(path, &summary)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn write_dispersion_csv(path: &Path, table: &DispersionTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DISPERSION_HEADER).map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            fmt_f64(r.k[0]),
            fmt_f64(r.k[1]),
            fmt_f64(r.theta_plus),
            fmt_f64(r.theta_minus),
            fmt_f64(r.omega_plus),
            fmt_f64(r.omega_minus),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{raw}'", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
