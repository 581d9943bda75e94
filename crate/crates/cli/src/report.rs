//! Report files: a single report.json per run (resolved config embedded, no
//! timestamps, so identical runs produce identical bytes) plus plot-ready CSV
//! tables with fixed 17-significant-digit formatting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use nullwave_core::picard::PicardReport;
use nullwave_core::GridField;

use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    experiment: &'a str,
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub fn write_report<T: Serialize>(
    out_dir: &Path,
    config: &ExperimentConfig,
    result: &T,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join("report.json");
    let doc = Document { experiment: config.experiment.name(), config, result };
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Convergence table: one row per sweep, budget column only when the budget
/// recursion is defined, and the verdict as a trailing comment line.
pub fn write_convergence_csv(out_dir: &Path, report: &PicardReport) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("convergence.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "m,r_measured,r_budget,diff_triple,ratio")?;
    for rec in &report.iterations {
        let budget = report
            .budget
            .as_ref()
            .and_then(|b| b.get(rec.m))
            .map(|v| fmt(*v))
            .unwrap_or_default();
        let ratio = rec.ratio.map(fmt).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            rec.m,
            fmt(rec.r_measured),
            budget,
            fmt(rec.diff_triple),
            ratio
        )?;
    }
    writeln!(w, "# verdict,{:?}", report.verdict)?;
    w.flush()?;
    Ok(())
}

/// Two-column table of (t, value) pairs.
pub fn write_curve_csv(out_dir: &Path, name: &str, header: &str, rows: &[(f64, f64)]) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "{header}")?;
    for (t, v) in rows {
        writeln!(w, "{},{}", fmt(*t), fmt(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-component field tables under fields/, subsampled to keep the files
/// plot-sized regardless of grid resolution.
pub fn write_fields_csv(out_dir: &Path, names: &[String], fields: &[GridField]) -> Result<()> {
    let dir = out_dir.join("fields");
    std::fs::create_dir_all(&dir)?;
    for (name, field) in names.iter().zip(fields) {
        let g = field.grid();
        let stride = (g.nx.max(g.nt) / 200).max(1);
        let mut w = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
        field.write_csv(&mut w, name, stride)?;
        w.flush()?;
    }
    Ok(())
}
