//! Report records and their JSON-lines / CSV serialization.
//!
//! Schema `tame-report/1`: one object per task with the fields of
//! [`TaskReport`]. Objects nested under `inputs` and `results` have sorted
//! keys; non-finite numbers are written as `null` (or `"inf"` for open
//! upper ends of norm brackets).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Expect, Format};
use crate::tasks::{LadderRow, Status};

pub const SCHEMA: &str = "tame-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub schema: &'static str,
    pub seed: u64,
    pub bracket_tolerance: f64,
    pub recheck_samples: usize,
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub kind: String,
    pub status: Status,
    pub expect: Expect,
    pub inputs: Value,
    pub results: Value,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub ladder: Option<Vec<LadderRow>>,
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

fn io_err(path: &Path, e: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> IoError {
    IoError { path: path.to_path_buf(), source: e.into() }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

pub fn to_json_lines<T: Serialize>(records: &[T]) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    task: &'a str,
    kind: &'a str,
    status: Status,
    expect: Expect,
    seed: u64,
    truncation: Option<usize>,
    error: &'a str,
}

/// Writes the reports into `dir` and returns the written paths with a
/// SHA-256 digest of each file.
pub fn emit_report(reports: &[TaskReport], format: Format, dir: &Path) -> Result<Vec<(PathBuf, String)>, IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join("report.jsonl");
            let bytes = to_json_lines(reports).map_err(|e| io_err(&path, e))?;
            files.push((path, bytes));
        }
        Format::Csv => {
            let path = dir.join("summary.csv");
            let rows: Vec<SummaryRow> = reports
                .iter()
                .map(|r| SummaryRow {
                    task: &r.task,
                    kind: &r.kind,
                    status: r.status,
                    expect: r.expect,
                    seed: r.provenance.seed,
                    truncation: r.provenance.truncation,
                    error: r.error.as_deref().unwrap_or(""),
                })
                .collect();
            let bytes = if rows.is_empty() {
                b"task,kind,status,expect,seed,truncation,error\n".to_vec()
            } else {
                csv_bytes(&rows).map_err(|e| io_err(&path, e))?
            };
            files.push((path, bytes));
            for r in reports {
                if let Some(ladder) = &r.ladder {
                    let path = dir.join(format!("{}.csv", r.task));
                    let bytes = csv_bytes(ladder).map_err(|e| io_err(&path, e))?;
                    files.push((path, bytes));
                }
            }
        }
    }
    let mut written = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        write_file(&path, &bytes)?;
        written.push((path, hex_digest(&bytes)));
    }
    Ok(written)
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> TaskReport {
        TaskReport {
            task: "t".into(),
            kind: "scan".into(),
            status: Status::Ok,
            expect: Expect::Pass,
            inputs: json!({ "z": 1, "a": 2 }),
            results: json!({ "K": [1.0, 1.0] }),
            provenance: Provenance { schema: SCHEMA, seed: 3, bracket_tolerance: 1e-6, recheck_samples: 64, truncation: Some(4) },
            error: None,
            ladder: Some(vec![LadderRow { n: 8, k: 8.0, fit: 8.0 }]),
        }
    }

    #[test]
    fn json_keys_are_stable() {
        let line = String::from_utf8(to_json_lines(&[sample()]).unwrap()).unwrap();
        assert!(line.starts_with("{\"task\":\"t\",\"kind\":\"scan\",\"status\":\"ok\""));
        assert!(line.contains("\"inputs\":{\"a\":2,\"z\":1}"));
        assert!(line.ends_with("}\n"));
    }

    #[test]
    fn ladder_csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&[sample()], Format::Csv, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text.lines().next().unwrap(), "N,K_n,fit");
    }
}
