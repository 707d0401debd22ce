//! Command line front end.
//!
//! Exit codes: 0 success, 2 training diverged, 3 bad input or I/O failure,
//! 4 enumeration cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wpt_marl::harness::{
    emit_plot_data, load_config, run_oracle, run_training, RunConfig, PLOT_WINDOW,
};

#[derive(Parser)]
#[command(
    name = "wpt-marl",
    version,
    about = "Multiagent RL for codebook energy beamforming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the config `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config `episodes`.
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// Output directory for `train`; output file for `plotdata`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write metrics.csv, checkpoint.txt and config.txt.
    Train { config: PathBuf },
    /// Print exhaustive and greedy sequential search results.
    Oracle { config: PathBuf },
    /// Smooth a metrics file (window 50) into a plot-ready CSV.
    Plotdata { metrics: PathBuf },
}

fn configured(path: &Path, cli: &Cli) -> wpt_marl::Result<RunConfig> {
    let mut cfg = load_config(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.episodes {
        cfg.episodes = n;
    }
    if let Some(o) = &cli.out {
        cfg.out.clone_from(o);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> wpt_marl::Result<()> {
    match &cli.command {
        Command::Train { config } => {
            let cfg = configured(config, cli)?;
            let report = run_training(&cfg)?;
            let last = report.metrics.last().expect("at least one episode");
            println!(
                "{} episodes of {}: last total {:.6e} J, reward {}",
                report.metrics.len(),
                cfg.agent,
                last.total_energy,
                last.reward
            );
            println!("metrics    {}", report.metrics_path.display());
            println!("checkpoint {}", report.checkpoint_path.display());
        }
        Command::Oracle { config } => {
            let report = run_oracle(&configured(config, cli)?)?;
            println!("{}", report.machine_line());
            print!("{report}");
        }
        Command::Plotdata { metrics } => {
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| metrics.with_extension("plot.csv"));
            let rows = emit_plot_data(metrics, &out, PLOT_WINDOW)?;
            println!("{rows} rows -> {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(3))
        }
    }
}
