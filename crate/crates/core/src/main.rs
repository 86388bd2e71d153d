use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hermite_qm::io::{parse_config, run, Mode, RunError};

/// Truncated Hermite-basis spectra, evolution and scattering.
#[derive(Parser)]
#[command(name = "hermite-qm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of p² + V and the persisted eigensystem.
    Spectrum(RunArgs),
    /// Time evolution of an initial state.
    Evolve(RunArgs),
    /// Wave operators, T-matrix and S-matrix.
    Scatter(RunArgs),
    /// Convergence in the basis dimension, optionally with an (N, ε, T) sweep.
    Converge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

const THREADS_VAR: &str = "HERMITE_QM_THREADS";

fn fail(kind: &str, message: &str) -> ExitCode {
    let record = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{record}");
    ExitCode::FAILURE
}

fn execute(mode: Mode, args: &RunArgs) -> Result<(), (String, String)> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ("io".to_string(), format!("{}: {e}", args.config.display())))?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let config = parse_config(&text, Some(mode), base).map_err(|e| {
        let err = RunError::from(e);
        (err.kind().to_string(), err.to_string())
    })?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| ("config".to_string(), "missing required key \"output.dir\" (or pass --out)".to_string()))?;
    run(&config, Some(&text), &out).map_err(|e| (e.kind().to_string(), e.to_string()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail("threads", &e.to_string());
                }
            }
            _ => return fail("threads", &format!("{THREADS_VAR} must be a positive integer, got \"{v}\"")),
        }
    }
    let (mode, args) = match &cli.command {
        Command::Spectrum(a) => (Mode::Spectrum, a),
        Command::Evolve(a) => (Mode::Evolve, a),
        Command::Scatter(a) => (Mode::Scatter, a),
        Command::Converge(a) => (Mode::Converge, a),
    };
    match execute(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((kind, message)) => fail(&kind, &message),
    }
}
