use wpt_marl::env::{EnvConfig, WptEnv};
use wpt_marl::harness::{run_training, AgentKind, RunConfig};
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{
    evaluate_greedy, train_actor_critic, train_tabular_rollout, LearnerConfig,
};
use wpt_marl::oracle::{exhaustive_search, DEFAULT_ENUMERATION_CAP};

fn small_config() -> RunConfig {
    let mut cfg = RunConfig {
        placement_seed: Some(1),
        ..RunConfig::default()
    };
    cfg.env.tx_positions = vec![(0.0, 0.0), (30.0, 0.0)];
    cfg.env.codebook_size = 4;
    cfg.env.rx_count = 3;
    cfg
}

#[test]
fn tabular_run_tracks_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        episodes: 2000,
        seed: 0,
        out: dir.path().to_path_buf(),
        ..small_config()
    };
    let env = WptEnv::new(cfg.effective_env()).unwrap();
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP).unwrap();
    let report = run_training(&cfg).unwrap();
    assert_eq!(report.metrics.len(), 2000);
    let tail = &report.metrics[1900..];
    let mean = tail.iter().map(|m| m.total_energy).sum::<f64>() / 100.0;
    assert!(
        (mean - oracle.total).abs() <= 0.01 * oracle.total,
        "{mean} vs {}",
        oracle.total
    );
}

#[test]
fn greedy_tabular_policy_holds_the_optimum() {
    let cfg = small_config();
    let env = WptEnv::new(cfg.effective_env()).unwrap();
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP).unwrap();
    let out = train_tabular_rollout(
        &env,
        &cfg.learner,
        TrainOptions {
            episodes: 2000,
            seed: 1,
            timing: false,
        },
    )
    .unwrap();
    let eval = evaluate_greedy(&env, &mut out.agent.greedy()).unwrap();
    assert_eq!(eval.final_codes, oracle.codes);
}

#[test]
fn actor_critic_reward_improves_early() {
    let env = WptEnv::new(EnvConfig {
        placement_seed: 1,
        ..small_config().env
    })
    .unwrap();
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
            episodes: 500,
            seed: 2,
            timing: false,
        },
    )
    .unwrap();
    let mean = |r: std::ops::Range<usize>| {
        out.metrics[r.clone()].iter().map(|m| m.reward).sum::<f64>() / r.len() as f64
    };
    assert!(
        mean(400..500) > mean(0..100),
        "{} !> {}",
        mean(400..500),
        mean(0..100)
    );
}

#[test]
fn joint_baseline_runs_through_harness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        agent: AgentKind::JointTabular,
        episodes: 300,
        out: dir.path().to_path_buf(),
        ..small_config()
    };
    let report = run_training(&cfg).unwrap();
    assert!(report.metrics.iter().all(|m| m.total_energy > 0.0));
    let text = std::fs::read_to_string(report.checkpoint_path).unwrap();
    assert!(text.starts_with("wpt-qtable v1"));
}
