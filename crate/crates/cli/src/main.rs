use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use toroton_core::io::dispatch::{dispatch, write_error_report, MANIFEST};
use toroton_core::io::{parse_config, RunConfig, Subcommand, TableFormat};
use toroton_core::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Profile,
    Propagate,
    Stability,
    Pair,
    Young,
    Curvature,
    Torus,
    Sweep,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Profile => Subcommand::Profile,
            Command::Propagate => Subcommand::Propagate,
            Command::Stability => Subcommand::Stability,
            Command::Pair => Subcommand::Pair,
            Command::Young => Subcommand::Young,
            Command::Curvature => Subcommand::Curvature,
            Command::Torus => Subcommand::Torus,
            Command::Sweep => Subcommand::Sweep,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Filament modes, propagation experiments and torus closure.
///
/// Set TOROTON_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "toroton", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (TOML sections).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override one key, e.g. `--set medium.mu1=2.5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Encoding for tabular outputs.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn threads() -> Result<Option<usize>, Error> {
    match std::env::var("TOROTON_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!("TOROTON_THREADS must be a positive integer (got '{v}')"))),
        },
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.apply_overrides(&cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = Subcommand::from(cli.command);
    let prepared = threads().and_then(|n| {
        if let Some(n) = n {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Usage(e.to_string()))?;
        }
        load(&cli)
    });
    let cfg = match prepared {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("toroton: {e}");
            let _ = write_error_report(&cli.out, Some(sub), &e);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let format = match cli.format {
        Format::Csv => TableFormat::Csv,
        Format::Json => TableFormat::Json,
    };
    match dispatch(sub, &cfg, &cli.out, format) {
        Ok(m) => {
            println!("{}: {} files, manifest {}", sub.name(), m.files.len(), cli.out.join(MANIFEST).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("toroton {}: {e}", sub.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
