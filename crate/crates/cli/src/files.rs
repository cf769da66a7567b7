//! CSV side files owned by the CLI and write-once output handling.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bpae_core::pipeline::{PredictionRow, ScreenRow};

use crate::error::CliError;

/// Output paths claimed up front, so a refusal happens before any compute.
pub struct Outputs {
    force: bool,
    claimed: HashSet<PathBuf>,
    inputs: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(force: bool, inputs: &[&Path]) -> Self {
        Self {
            force,
            claimed: HashSet::new(),
            inputs: inputs.iter().map(|p| canonical(p)).collect(),
        }
    }

    pub fn claim(&mut self, path: PathBuf) -> Result<PathBuf, CliError> {
        let c = canonical(&path);
        if self.inputs.contains(&c) {
            return Err(CliError::Usage(format!(
                "{} is both an input and an output",
                path.display()
            )));
        }
        if !self.claimed.insert(c) {
            return Err(CliError::Usage(format!("{} is written twice", path.display())));
        }
        if path.exists() && !self.force {
            return Err(CliError::Exists(path));
        }
        Ok(path)
    }

    pub fn dir(&mut self, dir: &Path, names: &[&str]) -> Result<Vec<PathBuf>, CliError> {
        names.iter().map(|n| self.claim(dir.join(n))).collect()
    }
}

/// Absolute, lexically normalized path; the file need not exist.
fn canonical(p: &Path) -> PathBuf {
    if let Ok(c) = p.canonicalize() {
        return c;
    }
    let abs = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().unwrap_or_default().join(p)
    };
    match (abs.parent().and_then(|d| d.canonicalize().ok()), abs.file_name()) {
        (Some(d), Some(f)) => d.join(f),
        _ => abs,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        ensure_dir(d)?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::InFile {
        path: path.to_path_buf(),
        source: bpae_core::error::FormatError::Invalid(e.to_string()).into(),
    })
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::InFile {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    if let Some(d) = path.parent() {
        ensure_dir(d)?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| CliError::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|x| x.map_err(|e| csv_err(path, e))).collect()
}

pub fn write_screening(path: &Path, rows: &[ScreenRow]) -> Result<(), CliError> {
    write_rows(path, rows)
}

/// Predictions from the `predict` stage; truth is joined in at evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: u64,
    pub sbp_pred: f64,
    pub dbp_pred: f64,
}

pub fn write_predictions(path: &Path, rows: &[Prediction]) -> Result<(), CliError> {
    write_rows(path, rows)
}

/// Accepts both the `predict` output and the experiment output with truth
/// columns; extra columns are ignored.
pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, CliError> {
    read_rows(path)
}

pub fn write_prediction_rows(path: &Path, rows: &[PredictionRow]) -> Result<(), CliError> {
    write_rows(path, rows)
}

pub fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}
