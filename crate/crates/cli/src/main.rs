use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use symcost_cli::config::Config;
use symcost_cli::plot::{plot_points, write_plot};
use symcost_cli::run::{run, RunOptions};

#[derive(Parser)]
#[command(name = "symcost", version, about = "Check symmetry and irreversibility trade-offs on scenario sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config; exit 0 if all pass, 2 on any violation, 1 on errors.
    Run {
        config: PathBuf,
        /// JSON-lines report path (overrides the config).
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV summary path (overrides the config).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Extract two report fields as CSV sorted by the first.
    Plot {
        report: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            report,
            summary,
            jobs,
        } => match run(&config, &RunOptions { report, summary, jobs }) {
            Ok(outcome) => {
                let bad = outcome.violations();
                eprintln!(
                    "{} lines, {} violations; report {}, summary {}",
                    outcome.lines.len(),
                    bad,
                    outcome.report_path.display(),
                    outcome.summary_path.display()
                );
                if bad == 0 {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => fail(&e),
        },
        Command::Plot { report, x, y, out } => {
            let points = match plot_points(&report, &x, &y) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let written = match out {
                Some(path) => std::fs::File::create(&path)
                    .and_then(|f| write_plot(&mut std::io::BufWriter::new(f), &x, &y, &points)),
                None => write_plot(&mut std::io::stdout().lock(), &x, &y, &points),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Command::Validate { config } => match Config::load(&config) {
            Ok(cfg) => {
                let n: usize = cfg.scenarios.iter().map(|s| s.seeds.len()).sum();
                eprintln!("ok: {} scenarios, {n} runs", cfg.scenarios.len());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}

fn fail(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}
