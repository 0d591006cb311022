use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use varwave::scenario::{self, DiagnosticToggles, Scenario};
use varwave::Execution;

mod runner;

use runner::{Compare, RunOptions};

#[derive(Parser)]
#[command(
    name = "wavesolve",
    version,
    about = "Conservative solutions of the variational wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write slices, measures and a report.
    Run {
        /// Config file, or the name of a built-in scenario.
        config: String,
        /// Output directory [default: out/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reference solution to compare slices against.
        #[arg(long, value_enum, default_value_t = Compare::None)]
        compare: Compare,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        threads: Option<usize>,
        /// Write the full lattice to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Solve a scenario with every diagnostic enabled and print the report.
    Diagnose {
        /// Config file, or the name of a built-in scenario.
        config: String,
        /// Output directory [default: out/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List built-in scenarios and registered speeds and data.
    Scenarios,
}

fn load(config: &str) -> Result<Scenario> {
    let path = Path::new(config);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        return scenario::parse_config_named(&text, name).with_context(|| format!("parsing {}", path.display()));
    }
    match scenario::preset(config) {
        Some(s) => Ok(s),
        None => bail!("no config file or built-in scenario named '{config}'"),
    }
}

fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            #[cfg(not(feature = "parallel"))]
            eprintln!("warning: built without parallel support; ignoring --threads {n}");
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn default_out(scn: &Scenario) -> PathBuf {
    Path::new("out").join(&scn.name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            compare,
            threads,
            dump,
        } => {
            let scn = load(&config)?;
            let opts = RunOptions {
                out: out.unwrap_or_else(|| default_out(&scn)),
                compare,
                execution: execution(threads)?,
                extra: DiagnosticToggles::default(),
                dump,
            };
            let summary = runner::run(&scn, &opts)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} files to {}", summary.files.len(), opts.out.display());
        }
        Command::Diagnose { config, out, threads } => {
            let scn = load(&config)?;
            let opts = RunOptions {
                out: out.unwrap_or_else(|| default_out(&scn)),
                compare: Compare::None,
                execution: execution(threads)?,
                extra: DiagnosticToggles::all(),
                dump: None,
            };
            let summary = runner::run(&scn, &opts)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", summary.report);
        }
        Command::Scenarios => {
            let mut kind = "";
            for (k, id, desc) in scenario::registered_names() {
                if k != kind {
                    println!("{k}:");
                    kind = k;
                }
                println!("  {id:<18} {desc}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
