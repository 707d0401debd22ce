//! A config file through the harness: oracle report, training run, plot series.

use wpt_marl::harness::{emit_plot_data, parse_config, run_oracle, run_training, PLOT_WINDOW};

const CONFIG: &str = "
agent = tabular-rollout
episodes = 400
seed = 5
tx_positions = 0,0; 30,0
codebook_size = 4
rx_count = 3
max_steps = 50
";

fn main() -> wpt_marl::Result<()> {
    let dir = std::env::temp_dir().join("wpt-marl-harness");
    let mut cfg = parse_config(CONFIG)?;
    cfg.out = dir.clone();

    let oracle = run_oracle(&cfg)?;
    println!("{}", oracle.machine_line());
    print!("{oracle}");

    let report = run_training(&cfg)?;
    let plot = dir.join("plot.csv");
    let rows = emit_plot_data(&report.metrics_path, &plot, PLOT_WINDOW)?;
    println!(
        "{} metrics rows -> {} smoothed rows in {}",
        report.metrics.len(),
        rows,
        plot.display()
    );
    println!("effective config:\n{}", cfg.to_text());
    Ok(())
}
