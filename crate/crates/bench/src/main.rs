use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use ttno_bench::experiment::{alpha_trend_notes, metadata, write_csv, write_csv_file};
use ttno_bench::{run_experiment, verify, BenchError, ExperimentConfig, ExperimentKind};

/// Rank, memory and error tables for tree tensor network operators of
/// long-range spin Hamiltonians.
///
/// Exit status: 0 on success, 1 when a verification check or the run
/// itself fails, 2 on invalid arguments or configuration.
#[derive(Debug, Parser)]
#[command(name = "ttno-bench", version)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// closed, open, synthetic, compare-trees or verify; overrides the config.
    #[arg(long, value_name = "KIND", value_parser = |s: &str| s.parse::<ExperimentKind>().map_err(|e| e.to_string()))]
    experiment: Option<ExperimentKind>,
    /// CSV output path; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Largest dense matrix (in entries) any oracle may build.
    #[arg(long, value_name = "ENTRIES")]
    dense_cap: Option<usize>,
    /// Seed for the random instances of the verification suite.
    #[arg(long)]
    seed: Option<u64>,
}

const OK: u8 = 0;
const FAILURE: u8 = 1;
const USAGE: u8 = 2;

fn load(cli: &Cli) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match (&cli.config, cli.experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(kind)) => ExperimentConfig::new(kind),
        (None, None) => return Err(BenchError::Usage("one of --config or --experiment is required".into())),
    };
    if let Some(kind) = cli.experiment {
        cfg.experiment = kind;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(cap) = cli.dense_cap {
        cfg.dense_cap = cap;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn emit<T: serde::Serialize>(rows: &[T], out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), BenchError> {
    match out {
        Some(path) => write_csv_file(rows, path),
        None => write_csv(rows, stdout),
    }
}

fn run(cfg: &ExperimentConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, BenchError> {
    if cfg.experiment == ExperimentKind::Verify {
        let report = verify(cfg)?;
        writeln!(stderr, "{report}")?;
        emit(&report.checks, cfg.output.as_deref(), stdout)?;
        return Ok(report.passed());
    }
    let output = run_experiment(cfg)?;
    emit(&output.rows, cfg.output.as_deref(), stdout)?;
    if let Some(path) = &cfg.output {
        let text = serde_json::to_string_pretty(&metadata(cfg)).map_err(|e| BenchError::Io(e.to_string()))?;
        std::fs::write(meta_path(path), text)?;
    }
    if let Some(path) = &cfg.rank_table {
        write_csv_file(&output.nodes, path)?;
    }
    for note in alpha_trend_notes(&output.rows) {
        writeln!(stderr, "note: {note}")?;
    }
    for row in output.rows.iter().filter(|r| r.error.is_some()) {
        writeln!(
            stderr,
            "d={} alpha={} epsilon={:e} tree={}: {}",
            row.d,
            row.alpha,
            row.epsilon,
            row.tree,
            row.error.as_deref().unwrap_or_default()
        )?;
    }
    Ok(true)
}

fn run_cli(args: impl IntoIterator<Item = OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return USAGE;
            }
            let _ = write!(stdout, "{text}");
            return OK;
        }
    };
    let result = load(&cli).and_then(|cfg| run(&cfg, stdout, stderr));
    match result {
        Ok(true) => OK,
        Ok(false) => FAILURE,
        Err(e) => {
            let _ = writeln!(stderr, "ttno-bench: {e}");
            if matches!(e, BenchError::Usage(_)) {
                USAGE
            } else {
                FAILURE
            }
        }
    }
}

fn main() -> ExitCode {
    let code = run_cli(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
