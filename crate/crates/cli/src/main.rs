use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use prony_bath_cli::output::json_bytes;
use prony_bath_cli::{
    cmd_compare, cmd_cost, cmd_fit, cmd_spectrum, read_series, run_selftest, write_artifacts,
    Artifact, CliError, FailureKind, RunConfig, SpectrumPart,
};

const THREADS_ENV: &str = "PRONY_BATH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "prony-bath", version, about = "Exponential decomposition of bath correlation functions")]
struct Cli {
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to PRONY_BATH_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the correlation function and fit both parts.
    Fit,
    /// Exact and fitted spectra of a series file on the error grid.
    Spectrum {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        part: SpectrumPart,
    },
    /// Error-versus-K tables and matched-accuracy ratios.
    Compare,
    /// Hierarchy size for (K, L), optionally against (K2, L2).
    Cost {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        n_alpha: u64,
        #[arg(long, default_value_t = 1)]
        n_u: u64,
        #[arg(long)]
        l: u64,
        #[arg(long, requires = "l2")]
        k2: Option<u64>,
        #[arg(long, requires = "k2")]
        l2: Option<u64>,
    },
    /// Run the invariant checks; exits 1 on any violation.
    Selftest,
}

#[derive(Serialize)]
struct Index<'a> {
    command: &'a str,
    files: Vec<String>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn emit(command: &str, dir: &std::path::Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let paths = write_artifacts(dir, artifacts)?;
    let index = Index {
        command,
        files: paths.iter().map(|p| p.display().to_string()).collect(),
    };
    print!("{}", String::from_utf8_lossy(&json_bytes(&index)?));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Fit => emit("fit", &dir, &cmd_fit(&cfg)?.artifacts()?),
        Command::Spectrum { series, part } => {
            let series = read_series(&series)?;
            emit("spectrum", &dir, &cmd_spectrum(&cfg, &series, part)?.artifacts()?)
        }
        Command::Compare => emit("compare", &dir, &cmd_compare(&cfg)?.artifacts()?),
        Command::Cost {
            k,
            n_alpha,
            n_u,
            l,
            k2,
            l2,
        } => {
            let out = cmd_cost(k, n_alpha, n_u, l, k2.zip(l2))?;
            let bytes = json_bytes(&out)?;
            if cli.out.is_some() {
                write_artifacts(&dir, &[Artifact::new("cost.json", bytes.clone())])?;
            }
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
        Command::Selftest => {
            let report = run_selftest(cfg.seed);
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if cli.out.is_some() {
                write_artifacts(&dir, &[Artifact::new("selftest.json", json_bytes(&report)?)])?;
            }
            if report.passed() {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                Err(CliError::new(FailureKind::Violation, format!("{failed} selftest checks failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
