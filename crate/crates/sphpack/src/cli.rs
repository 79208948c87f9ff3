//! Command-line interface: `seed`, `relax`, `diagnose`, `version`. All
//! messages go to stderr; data goes to the files named by the config.
//! Exit codes: 0 success, 1 validation error, 2 non-convergence (the
//! distribution is still written).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::io::{parse_config, run_diagnose, run_relax, run_seed, RunArtifacts, RunConfig};

#[derive(Parser)]
#[command(name = "sphpack", version, about = "Body-fitted particle distributions for multi-body SPH")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the preconditioned lattice particle distribution.
    Seed {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the configured relaxation end to end.
    Relax {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute diagnostics on an existing particle CSV.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        particles: PathBuf,
    },
    /// Print the version.
    Version,
}

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| e.to_string())
}

fn report(artifacts: &RunArtifacts) {
    eprintln!(
        "bodies: {} particles{}",
        artifacts
            .particle_counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" + "),
        if artifacts.gap_cells > 0 {
            format!("; WARNING: {} interface cells disagree in sign", artifacts.gap_cells)
        } else {
            String::new()
        }
    );
    for file in &artifacts.files {
        eprintln!("wrote {}", file.display());
    }
}

pub fn cli_main<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version parse "errors" are successful exits.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Version => {
            println!("sphpack {}", env!("CARGO_PKG_VERSION"));
            0
        }
        Command::Seed { config } => run_with(&config, run_seed),
        Command::Relax { config } => run_with(&config, run_relax),
        Command::Diagnose { config, particles } => {
            run_with(&config, |cfg| run_diagnose(cfg, &particles))
        }
    }
}

fn run_with(
    config: &Path,
    run: impl FnOnce(&RunConfig) -> crate::Result<RunArtifacts>,
) -> i32 {
    let cfg = match load_config(config) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    match run(&cfg) {
        Ok(artifacts) => {
            report(&artifacts);
            if artifacts.converged {
                0
            } else {
                eprintln!("warning: relaxation did not converge within max_steps");
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
