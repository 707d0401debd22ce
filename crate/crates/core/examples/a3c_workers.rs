//! Asynchronous actor-critic: several workers share one parameter set.
//! Results vary run to run once more than one worker is used.

use std::time::Instant;

use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{evaluate_greedy, train_actor_critic, LearnerConfig};

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig {
        tx_positions: vec![(0.0, 0.0), (30.0, 0.0)],
        codebook_size: 4,
        rx_count: 3,
        placement_seed: 1,
        ..EnvConfig::default()
    })?;
    for workers in [1, 2, 4] {
        let cfg = LearnerConfig {
            actor_lr: 0.02,
            critic_lr: 0.02,
            hidden: 16,
            workers,
            ..LearnerConfig::default()
        };
        let t = Instant::now();
        let out = train_actor_critic(
            &env,
            &cfg,
            TrainOptions {
                episodes: 1500,
                seed: 3,
                timing: false,
            },
        )?;
        let eval = evaluate_greedy(&env, &mut out.model.greedy())?;
        println!(
            "{workers} worker(s): {:.2}s, greedy codes {:?}, total {:.4}",
            t.elapsed().as_secs_f64(),
            eval.final_codes,
            eval.final_total
        );
    }
    Ok(())
}
