//! The `compare` and `list` verbs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::run::{FAILED_MARKER, MANIFEST};

#[derive(Debug, Clone, Deserialize)]
pub struct CheckRow {
    pub quantity: String,
    pub manifold: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub parameter: String,
    pub value: f64,
    pub bound: String,
    pub pass: String,
}

pub fn read_checks(run_dir: &Path) -> Result<Vec<CheckRow>> {
    let path = run_dir.join("checks.csv");
    let mut reader = csv::Reader::from_path(&path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Input(format!("{}: {e}", path.display()))))
        .collect()
}

/// One quantity across runs; `values[i]` is `None` where run `i` lacks it.
#[derive(Debug, Clone)]
pub struct ComparedRow {
    pub quantity: String,
    pub parameter: String,
    pub values: Vec<Option<f64>>,
    pub passes: Vec<Option<String>>,
}

impl ComparedRow {
    /// Differences against the first run.
    pub fn deltas(&self) -> Vec<Option<f64>> {
        let base = self.values[0];
        self.values.iter().map(|v| Some((*v)? - base?)).collect()
    }

    /// A later run fails a check the first run passed.
    pub fn regressed(&self) -> bool {
        self.passes[0].as_deref() == Some("true") && self.passes[1..].iter().any(|p| p.as_deref() == Some("false"))
    }
}

pub fn compare(dirs: &[PathBuf]) -> Result<Vec<ComparedRow>> {
    if dirs.len() < 2 {
        return Err(CliError::Input("compare needs at least two run directories".into()));
    }
    let runs = dirs.iter().map(|d| read_checks(d)).collect::<Result<Vec<_>>>()?;
    let mut keyed: BTreeMap<(String, String), ComparedRow> = BTreeMap::new();
    for (i, rows) in runs.iter().enumerate() {
        for r in rows {
            let entry = keyed.entry((r.quantity.clone(), r.parameter.clone())).or_insert_with(|| ComparedRow {
                quantity: r.quantity.clone(),
                parameter: r.parameter.clone(),
                values: vec![None; dirs.len()],
                passes: vec![None; dirs.len()],
            });
            entry.values[i] = Some(r.value);
            entry.passes[i] = Some(r.pass.clone());
        }
    }
    let out: Vec<ComparedRow> = keyed.into_values().collect();
    if !out.iter().any(|r| r.values.iter().all(Option::is_some)) {
        return Err(CliError::Input("the runs share no quantity".into()));
    }
    Ok(out)
}

pub fn format_table(dirs: &[PathBuf], rows: &[ComparedRow]) -> String {
    let mut out = String::new();
    for (i, d) in dirs.iter().enumerate() {
        let _ = writeln!(out, "[{i}] {}", d.display());
    }
    let mut header = format!("{:<48} {:<36}", "quantity", "parameter");
    for i in 0..dirs.len() {
        let _ = write!(header, " {:>14}", format!("[{i}]"));
    }
    for i in 1..dirs.len() {
        let _ = write!(header, " {:>14}", format!("[{i}]-[0]"));
    }
    let _ = writeln!(out, "{header}");
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
    for r in rows {
        let mut line = format!("{:<48} {:<36}", r.quantity, r.parameter);
        for v in &r.values {
            let _ = write!(line, " {:>14}", cell(*v));
        }
        for d in &r.deltas()[1..] {
            let _ = write!(line, " {:>14}", cell(*d));
        }
        if r.regressed() {
            line.push_str("  REGRESSION");
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    Fail,
    Failed,
    Incomplete,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Failed => "FAILED",
            Self::Incomplete => "INCOMPLETE",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunEntry {
    pub dir: String,
    pub status: RunStatus,
    pub name: String,
    pub manifold: String,
}

pub fn list(root: &Path) -> Result<Vec<RunEntry>> {
    let mut entries = Vec::new();
    for e in fs::read_dir(root).map_err(|e| CliError::io(root, e))? {
        let e = e.map_err(|e| CliError::io(root, e))?;
        let dir = e.file_name().to_string_lossy().into_owned();
        if !dir.starts_with("run-") || !e.path().is_dir() {
            continue;
        }
        let path = e.path();
        let status = if path.join(FAILED_MARKER).exists() {
            RunStatus::Failed
        } else if !path.join(MANIFEST).exists() {
            RunStatus::Incomplete
        } else if read_checks(&path)?.iter().any(|r| r.pass == "false") {
            RunStatus::Fail
        } else {
            RunStatus::Pass
        };
        let (name, manifold) = match fs::read_to_string(path.join("config.cfg")).ok().and_then(|t| ExperimentConfig::parse(&t).ok()) {
            Some(cfg) => (cfg.label(), cfg.manifold().map_or_else(|_| "?".into(), |m| m.label())),
            None => ("?".into(), "?".into()),
        };
        entries.push(RunEntry { dir, status, name, manifold });
    }
    entries.sort_by(|a, b| a.dir.cmp(&b.dir));
    Ok(entries)
}
