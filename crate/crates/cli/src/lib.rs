//! Batch driver behind the `qcx` binary.
//!
//! Exit codes: 0 all certificates pass, 1 a certificate fails or an analysis
//! errors, 2 unreadable or invalid input, 3 a series failed to converge.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod gallery;
pub mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Value};

use qcx_core::formats::{parse_document, InputDocument};

use commands::{run_unit, validate, Status, UnitOutput};
pub use manifest::{Command, RunManifest, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// Environment variable fixing the worker-pool size.
pub const WORKERS_ENV: &str = "QCX_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input { .. } | RunError::Usage(_) => EXIT_USAGE,
            RunError::Io { .. } => EXIT_FAILED,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Worker count from `QCX_WORKERS`, else the number of available cores.
pub fn workers_from_env() -> Result<usize, RunError> {
    match std::env::var(WORKERS_ENV) {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(RunError::Usage(format!(
                "{WORKERS_ENV}: expected a positive integer, got `{value}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn load_inputs(manifest: &RunManifest) -> Result<Vec<InputDocument>, RunError> {
    let command = manifest.command;
    if command == Command::Gallery {
        if !manifest.inputs.is_empty() {
            return Err(RunError::Usage("`gallery` takes no inputs".into()));
        }
        return Ok(Vec::new());
    }
    if manifest.inputs.is_empty() {
        return Err(RunError::Usage(format!("`{command}` needs at least one --in file")));
    }
    if command == Command::Hadamard && !manifest.inputs.len().is_multiple_of(2) {
        return Err(RunError::Usage("`hadamard` takes inputs in pairs".into()));
    }
    manifest
        .inputs
        .iter()
        .map(|path| {
            let fail = |message: String| RunError::Input {
                path: path.clone(),
                message,
            };
            let text = fs::read_to_string(path).map_err(|e| fail(format!("cannot read: {e}")))?;
            let doc = parse_document(&text).map_err(|e| fail(e.to_string()))?;
            validate(command, &doc, &manifest.tolerances).map_err(|e| {
                if e.field.is_empty() {
                    fail(e.message)
                } else {
                    fail(format!("field `{}`: {}", e.field, e.message))
                }
            })?;
            Ok(doc)
        })
        .collect()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Runs `manifest` on `workers` threads and returns the process exit code.
/// Errors that prevent any analysis are reported on stderr.
pub fn run(manifest: &RunManifest, workers: usize) -> i32 {
    match run_inner(manifest, workers) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qcx: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(manifest: &RunManifest, workers: usize) -> Result<i32, RunError> {
    let started = unix_now();
    let docs = load_inputs(manifest)?;
    let out_dir = &manifest.output_dir;
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Usage(format!("cannot start {workers} workers: {e}")))?;

    let mut lines: Vec<Value> = Vec::new();
    let mut status = Status::Passed;
    if manifest.command == Command::Gallery {
        let dir = out_dir.join("gallery");
        fs::create_dir_all(&dir).map_err(io_error(&dir))?;
        let items = qcx_core_result(gallery::gallery())?;
        for (index, (name, doc)) in items.into_iter().enumerate() {
            let path = dir.join(format!("{name}.json"));
            let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            fs::write(&path, text + "\n").map_err(io_error(&path))?;
            lines.push(json!({
                "command": manifest.command,
                "index": index,
                "input": Value::Null,
                "seed": manifest.seed,
                "kind": "gallery",
                "path": path,
            }));
        }
    } else {
        let group = if manifest.command == Command::Hadamard { 2 } else { 1 };
        let units: Vec<(usize, Vec<&InputDocument>, Vec<&PathBuf>)> = docs
            .chunks(group)
            .zip(manifest.inputs.chunks(group))
            .enumerate()
            .map(|(i, (d, p))| (i, d.iter().collect(), p.iter().collect()))
            .collect();
        let outputs: Vec<UnitOutput> = pool.install(|| {
            units
                .par_iter()
                .map(|(index, unit_docs, paths)| {
                    let stem = format!(
                        "{index:03}_{}",
                        paths.iter().map(|p| stem(p)).collect::<Vec<_>>().join("_x_")
                    );
                    run_unit(manifest.command, unit_docs, &manifest.tolerances, manifest.seed, &stem)
                })
                .collect()
        });
        for ((index, _, paths), output) in units.iter().zip(outputs) {
            status = status.max(output.status());
            for (name, bytes) in &output.csvs {
                let path = out_dir.join(name);
                fs::write(&path, bytes).map_err(io_error(&path))?;
            }
            let input: Value = if paths.len() == 1 {
                json!(paths[0])
            } else {
                json!(paths)
            };
            for entry in output.entries {
                let mut line = json!({
                    "command": manifest.command,
                    "index": index,
                    "input": input,
                    "seed": manifest.seed,
                });
                if let (Value::Object(line), Value::Object(entry)) = (&mut line, entry) {
                    line.extend(entry);
                }
                lines.push(line);
            }
        }
    }

    let report_path = out_dir.join("report.jsonl");
    let mut report = Vec::new();
    for line in &lines {
        serde_json::to_writer(&mut report, line).expect("JSON values serialize");
        report.push(b'\n');
    }
    fs::write(&report_path, report).map_err(io_error(&report_path))?;

    let code = match status {
        Status::Passed => EXIT_OK,
        Status::Failed => EXIT_FAILED,
        Status::NonConvergence => EXIT_NON_CONVERGENCE,
    };
    let metadata = json!({
        "command": manifest.command,
        "inputs": manifest.inputs,
        "output_dir": manifest.output_dir,
        "seed": manifest.seed,
        "tolerances": manifest.tolerances,
        "workers": workers,
        "started_unix": started,
        "finished_unix": unix_now(),
        "version": env!("CARGO_PKG_VERSION"),
        "exit_code": code,
    });
    let metadata_path = out_dir.join("metadata.json");
    let mut file = fs::File::create(&metadata_path).map_err(io_error(&metadata_path))?;
    serde_json::to_writer_pretty(&mut file, &metadata).expect("JSON values serialize");
    file.write_all(b"\n").map_err(io_error(&metadata_path))?;
    Ok(code)
}

fn qcx_core_result<T>(result: qcx_core::Result<T>) -> Result<T, RunError> {
    result.map_err(|e| RunError::Usage(e.to_string()))
}
