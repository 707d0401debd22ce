//! Exhaustive joint search against one-transmitter-at-a-time greedy search,
//! with and without a per-receiver energy floor.

use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::oracle::{exhaustive_search, greedy_sequential_search, DEFAULT_ENUMERATION_CAP};

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig {
        placement_seed: 9,
        ..EnvConfig::default()
    })?;
    let duration = env.config().transfer_duration;
    let energies = env.energies(&greedy_sequential_search(env.links(), duration, 0.0).codes)?;
    let weakest = energies.iter().copied().fold(f64::MAX, f64::min);

    for e_min in [0.0, weakest * 1.05, 1e9] {
        let ex = exhaustive_search(env.links(), duration, e_min, DEFAULT_ENUMERATION_CAP)?;
        let gr = greedy_sequential_search(env.links(), duration, e_min);
        println!("e_min {e_min:.3e} J");
        println!(
            "  exhaustive {:?} total {:.4} feasible {} ({} evals)",
            ex.codes, ex.total, ex.feasible, ex.evaluations
        );
        println!(
            "  greedy     {:?} total {:.4} feasible {} ({} evals)",
            gr.codes, gr.total, gr.feasible, gr.evaluations
        );
    }
    Ok(())
}
