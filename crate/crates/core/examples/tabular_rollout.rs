//! Q-learning through the sequential rollout on a two-transmitter network.
//!
//!     cargo run --release --example tabular_rollout -- 2000 7

use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{evaluate_greedy, train_tabular_rollout, LearnerConfig};
use wpt_marl::oracle::{exhaustive_search, DEFAULT_ENUMERATION_CAP};

fn main() -> wpt_marl::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().map_or(2000, |s| s.parse().expect("episodes"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let env = WptEnv::new(EnvConfig {
        tx_positions: vec![(0.0, 0.0), (30.0, 0.0)],
        codebook_size: 4,
        rx_count: 3,
        placement_seed: 1,
        ..EnvConfig::default()
    })?;
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP)?;
    let out = train_tabular_rollout(
        &env,
        &LearnerConfig::default(),
        TrainOptions {
            episodes,
            seed,
            timing: true,
        },
    )?;

    for chunk in out.metrics.chunks(episodes.div_ceil(10).max(1)) {
        let n = chunk.len() as f64;
        println!(
            "episodes {:>5}..{:<5} eps {:.3}  mean reward {:>9.1}  mean peak total {:.4}",
            chunk[0].episode,
            chunk[chunk.len() - 1].episode,
            chunk[0].epsilon,
            chunk.iter().map(|m| m.reward).sum::<f64>() / n,
            chunk.iter().map(|m| m.total_energy).sum::<f64>() / n,
        );
    }
    let eval = evaluate_greedy(&env, &mut out.agent.greedy())?;
    println!("q-table states: {}", out.agent.table.len());
    println!(
        "greedy policy commits {:?} (total {:.4})",
        eval.peak_codes, eval.peak_total
    );
    println!(
        "oracle                {:?} (total {:.4})",
        oracle.codes, oracle.total
    );
    Ok(())
}
