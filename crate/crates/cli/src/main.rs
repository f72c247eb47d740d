use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dampwave_cli::output::write_artifacts;
use dampwave_cli::{run, CliError, Command, Format, RunConfig};

const THREADS_VAR: &str = "DAMPWAVE_THREADS";

#[derive(Parser)]
#[command(
    name = "dampwave",
    version,
    about = "Isolating blocks and Conley indices for strongly damped waves at resonance"
)]
struct Cli {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `checks.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config {
        key: THREADS_VAR.into(),
        msg: format!("expected a thread count, got `{v}`"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config {
            key: THREADS_VAR.into(),
            msg: e.to_string(),
        })
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.checks.seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    let outcome = run(cli.command, &cfg)?;
    write_artifacts(&cfg.output.dir, &outcome.artifacts)?;
    print!("{}", outcome.summary);
    for a in &outcome.artifacts {
        println!("wrote {}", cfg.output.dir.join(&a.name).display());
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
