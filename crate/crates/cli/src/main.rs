use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qcx_cli::{run, workers_from_env, Command, RunManifest, Tolerances, EXIT_USAGE};

/// Certificates and diagnostics for meromorphic functions with a pole in the unit disk.
#[derive(Debug, Parser)]
#[command(name = "qcx", version)]
struct Args {
    command: Command,
    /// Input JSON files, processed in order.
    #[arg(long = "in", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Output directory for report.jsonl, metadata.json and CSV fields.
    #[arg(long = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Numerical override `key=value`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let mut tolerances = Tolerances::default();
    for assignment in &args.tol {
        if let Err(e) = tolerances.set(assignment) {
            eprintln!("qcx: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let workers = match workers_from_env() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("qcx: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let manifest = RunManifest {
        command: args.command,
        inputs: args.inputs,
        output_dir: args.out,
        seed: args.seed,
        tolerances,
    };
    ExitCode::from(run(&manifest, workers) as u8)
}
