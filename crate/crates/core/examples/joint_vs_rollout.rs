//! The joint-action Q-learner searches N^L actions per step; the rollout
//! learner makes L decisions over N codes each. Same budget, same instance.

use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{train_joint_tabular, train_tabular_rollout, EpisodeStats, LearnerConfig};
use wpt_marl::oracle::{exhaustive_search, DEFAULT_ENUMERATION_CAP};

fn tail_mean(m: &[EpisodeStats]) -> f64 {
    let tail = &m[m.len().saturating_sub(100)..];
    tail.iter().map(|s| s.total_energy).sum::<f64>() / tail.len() as f64
}

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig {
        tx_positions: vec![(0.0, 0.0), (30.0, 0.0), (30.0, 30.0)],
        codebook_size: 6,
        rx_count: 4,
        max_steps: 30,
        placement_seed: 5,
        ..EnvConfig::default()
    })?;
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP)?;
    let cfg = LearnerConfig::default();
    let opts = TrainOptions {
        episodes: 1500,
        seed: 2,
        timing: false,
    };

    let rollout = train_tabular_rollout(&env, &cfg, opts)?;
    let joint = train_joint_tabular(&env, &cfg, opts)?;
    println!("oracle total {:.4}", oracle.total);
    println!(
        "rollout: {:>6} q-table states, last-100 mean peak {:.4}",
        rollout.agent.table.len(),
        tail_mean(&rollout.metrics)
    );
    println!(
        "joint:   {:>6} q-table states, last-100 mean peak {:.4}",
        joint.agent.table.len(),
        tail_mean(&joint.metrics)
    );
    Ok(())
}
