//! Result files. Every file carries the tool version and config hash.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::{ExperimentConfig, ExperimentKind, Metrics, Report, RunData, TOOL, VERSION};
use crate::error::Result;

/// What a finished run left on disk.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub report: Report,
}

impl RunOutput {
    pub fn failed_cells(&self) -> usize {
        self.report.failed_cells()
    }
}

pub(super) fn field_file_name(n: usize) -> String {
    format!("field_n{n}.csv")
}

/// Metric columns as `(name, value)` in a stable order.
pub fn flatten_metrics(m: &Metrics) -> Vec<(String, Value)> {
    match serde_json::to_value(m) {
        Ok(Value::Object(map)) => map.into_iter().collect(),
        _ => Vec::new(),
    }
}

fn stamp(hash: &str) -> String {
    format!("# tool={TOOL} version={VERSION} config_hash={hash}")
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => csv_text(s),
        other => other.to_string(),
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn write_csv(path: &Path, report: &Report) -> Result<()> {
    let mut columns: Vec<String> = Vec::new();
    for r in &report.records {
        for (key, _) in r.metrics.iter().flat_map(flatten_metrics) {
            if !columns.contains(&key) {
                columns.push(key);
            }
        }
    }
    let mut f = BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{}", stamp(&report.config_hash))?;
    write!(f, "cell,n,replicate,master_seed,stream_index,status")?;
    for c in &columns {
        write!(f, ",{c}")?;
    }
    writeln!(f, ",error")?;
    for r in &report.records {
        write!(
            f,
            "{},{},{},{},{},{}",
            r.cell,
            r.n,
            r.replicate,
            r.seed.master_seed,
            r.seed.stream_index,
            if r.ok() { "ok" } else { "error" }
        )?;
        let values: Vec<(String, Value)> = r.metrics.iter().flat_map(flatten_metrics).collect();
        for c in &columns {
            let v = values
                .iter()
                .find(|(k, _)| k == c)
                .map(|(_, v)| csv_cell(v))
                .unwrap_or_default();
            write!(f, ",{v}")?;
        }
        writeln!(
            f,
            ",{}",
            r.error.as_deref().map(csv_text).unwrap_or_default()
        )?;
    }
    f.flush()?;
    Ok(())
}

fn fresh_dir(base: &Path, hash: &str) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    let stem = format!(
        "{}-{}",
        chrono::Utc::now().format("%Y%m%dT%H%M%SZ"),
        &hash[..12]
    );
    let mut i = 0;
    loop {
        let name = if i == 0 {
            stem.clone()
        } else {
            format!("{stem}-{i}")
        };
        let dir = base.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => i += 1,
            Err(e) => return Err(e.into()),
        }
    }
}

pub(super) fn write_run(
    cfg: &ExperimentConfig,
    data: RunData,
    total_seconds: f64,
) -> Result<RunOutput> {
    let RunData {
        report,
        cell_seconds: seconds,
        fields,
        estimates,
    } = data;
    let hash = report.config_hash.clone();
    let dir = fresh_dir(&cfg.output_dir, &hash)?;
    write_json(&dir.join("results.json"), &report)?;
    write_csv(&dir.join("results.csv"), &report)?;
    let cells: Vec<Value> = report
        .records
        .iter()
        .zip(&seconds)
        .map(|(r, s)| json!({ "cell": r.cell, "n": r.n, "replicate": r.replicate, "seconds": s }))
        .collect();
    write_json(
        &dir.join("timing.json"),
        &json!({
            "tool": TOOL,
            "version": VERSION,
            "config_hash": hash,
            "total_seconds": total_seconds,
            "cells": cells,
        }),
    )?;
    if cfg.experiment == ExperimentKind::AnticoncSweep {
        write_json(
            &dir.join("estimates.json"),
            &json!({ "tool": TOOL, "version": VERSION, "config_hash": hash, "estimates": estimates }),
        )?;
    }
    for (n, field) in &fields {
        let mut f = BufWriter::new(fs::File::create(dir.join(field_file_name(*n)))?);
        writeln!(
            f,
            "{} n={} k={} clipped={} clip_level={}",
            stamp(&hash),
            field.n,
            field.k,
            field.clipped,
            field.clip_level()
        )?;
        field.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(RunOutput { dir, report })
}
