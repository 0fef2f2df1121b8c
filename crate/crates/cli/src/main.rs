use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use contactlab_cli::{catalog, emit_plot_data, exit, load_config, read_report, run, RunOptions};

#[derive(Parser)]
#[command(
    name = "contactlab",
    version,
    about = "Dissipation experiments for contact maps of the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of an experiment config.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `output`, else `results/<id>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Multiply every grid resolution by this factor.
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Check a config and list every problem found.
    Validate { config: PathBuf },
    /// List map primitives, forms and task kinds.
    Catalog,
    /// Write the `x y` series of one task as a two-column file.
    Plot {
        report: PathBuf,
        task: String,
        /// Output file (default: `<task>.dat` next to the report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            refine,
        } => run_command(&config, out, refine),
        Command::Validate { config } => match load_config(&config) {
            Ok(exp) => {
                println!(
                    "{}: ok ({} tasks, n = {})",
                    config.display(),
                    exp.tasks.len(),
                    exp.dim
                );
                exit::SUCCESS
            }
            Err(e) => {
                eprint!("{e}");
                exit::CONFIG_ERROR
            }
        },
        Command::Catalog => {
            print!("{}", catalog());
            exit::SUCCESS
        }
        Command::Plot { report, task, out } => match plot_command(&report, &task, out) {
            Ok(()) => exit::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                exit::RUNTIME_ERROR
            }
        },
    };
    ExitCode::from(code as u8)
}

fn run_command(config: &Path, out: Option<PathBuf>, refine: usize) -> i32 {
    let exp = match load_config(config) {
        Ok(exp) => exp,
        Err(e) => {
            eprint!("{e}");
            return exit::CONFIG_ERROR;
        }
    };
    let out_dir = out
        .or_else(|| exp.echo.experiment.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("results").join(exp.id()));
    match run(
        &exp,
        &RunOptions {
            out_dir: out_dir.clone(),
            refine,
        },
    ) {
        Ok(doc) => {
            for c in &doc.checks {
                println!(
                    "{} {} ({}): {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.task,
                    c.kind,
                    c.detail
                );
            }
            println!("report written to {}", out_dir.display());
            if doc.pass {
                exit::SUCCESS
            } else {
                exit::CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::RUNTIME_ERROR
        }
    }
}

fn plot_command(report: &Path, task: &str, out: Option<PathBuf>) -> anyhow::Result<()> {
    let doc = read_report(report)?;
    let path = out.unwrap_or_else(|| {
        report
            .parent()
            .unwrap_or(Path::new("."))
            .join(format!("{task}.dat"))
    });
    let rows = emit_plot_data(&doc, task, &path).with_context(|| format!("plot {task}"))?;
    println!("{rows} rows written to {}", path.display());
    Ok(())
}
