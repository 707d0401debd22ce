//! Single-worker advantage actor-critic, then a checkpoint round trip.
//!
//!     cargo run --release --example actor_critic -- 1500 3

use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::learners::mlp::{load_checkpoint, save_checkpoint};
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{evaluate_greedy, train_actor_critic, LearnerConfig};
use wpt_marl::oracle::{exhaustive_search, DEFAULT_ENUMERATION_CAP};

fn main() -> wpt_marl::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().map_or(1500, |s| s.parse().expect("episodes"));
    let seed = args.next().map_or(3, |s| s.parse().expect("seed"));

    let env = WptEnv::new(EnvConfig {
        tx_positions: vec![(0.0, 0.0), (30.0, 0.0)],
        codebook_size: 4,
        rx_count: 3,
        placement_seed: 1,
        ..EnvConfig::default()
    })?;
    let cfg = LearnerConfig {
        actor_lr: 0.02,
        critic_lr: 0.02,
        hidden: 16,
        ..LearnerConfig::default()
    };
    let out = train_actor_critic(
        &env,
        &cfg,
        TrainOptions {
            episodes,
            seed,
            timing: false,
        },
    )?;
    let first: f64 = out.metrics.iter().take(100).map(|m| m.reward).sum::<f64>() / 100.0;
    let last: f64 = out
        .metrics
        .iter()
        .rev()
        .take(100)
        .map(|m| m.reward)
        .sum::<f64>()
        / 100.0;
    println!("mean episode reward: first 100 {first:.0}, last 100 {last:.0}");

    let eval = evaluate_greedy(&env, &mut out.model.greedy())?;
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP)?;
    println!(
        "greedy policy {:?} total {:.4} = {:.1}% of oracle {:?}",
        eval.final_codes,
        eval.final_total,
        100.0 * eval.final_total / oracle.total,
        oracle.codes
    );

    let dir = std::env::temp_dir().join("wpt-marl-actor-critic");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("checkpoint.txt");
    save_checkpoint(&path, &out.model.networks())?;
    let back = load_checkpoint(&path)?;
    assert_eq!(back, out.model.networks());
    println!(
        "checkpoint {} reloads bit-exactly ({} networks)",
        path.display(),
        back.len()
    );
    Ok(())
}
