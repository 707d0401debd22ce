//! One full step taken jointly and the same step taken agent by agent.

use wpt_marl::env::{EnvConfig, WptEnv};

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig {
        e_min: 20.0,
        ..EnvConfig::default()
    })?;
    let start = env.reset();
    println!(
        "defaults {:?}, observation {:?}",
        env.default_codes(),
        start.observation()
    );

    let action = [2, 5, 1, 6];
    let joint = env.step_joint(&start, &action)?;
    println!(
        "joint    {action:?}: reward {:6}, total {:.4} J",
        joint.reward,
        joint.next.total()
    );

    let mut state = start;
    for (agent, &a) in action.iter().enumerate() {
        let r = env.step_rollout(&state, agent, a)?;
        println!(
            "agent {agent} -> {a}: reward {:6}, provisional total {:.4} J, obs {:?}",
            r.reward,
            r.next.energies.iter().sum::<f64>(),
            r.next.observation()
        );
        state = r.next;
    }
    assert_eq!(state, joint.next);
    println!(
        "committed state matches the joint step; {} of {} receivers reach e_min",
        env.feasible_count(&state.energies),
        env.rx_count()
    );
    Ok(())
}
