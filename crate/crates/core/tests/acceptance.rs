//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpt_marl::array::{beam_power_gain, steering_vector, ArrayConfig};
use wpt_marl::env::{reward, EnvConfig, SignalModel, WptEnv};
use wpt_marl::harness::{run_oracle, run_training, AgentKind, RunConfig};
use wpt_marl::learners::actor_critic::{
    actor_gradient, actor_objective, critic_gradient, critic_loss, critic_targets,
};
use wpt_marl::learners::mlp::MlpGrad;
use wpt_marl::learners::tabular::TrainOptions;
use wpt_marl::learners::{
    evaluate_greedy, train_actor_critic, train_tabular_rollout, ActorSample, CriticSample, Head,
    LearnerConfig, MlpParams,
};
use wpt_marl::oracle::{exhaustive_search, greedy_sequential_search, DEFAULT_ENUMERATION_CAP};

type Check = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Two transmitters on the bottom edge, four codes, three receivers.
fn small_instance() -> WptEnv {
    WptEnv::new(EnvConfig {
        tx_positions: vec![(0.0, 0.0), (30.0, 0.0)],
        codebook_size: 4,
        rx_count: 3,
        e_min: 0.0,
        placement_seed: 1,
        ..EnvConfig::default()
    })
    .unwrap()
}

fn matched_beam_gain() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [2, 16, 64] {
        let cfg = ArrayConfig::new(m, PI, 8e6, 0.0).unwrap();
        for phi in [0.0, 0.3, PI / 3.0, PI / 2.0, 2.0, 3.0] {
            let a = steering_vector(phi, &cfg).unwrap();
            let g = beam_power_gain(&a.conj(), &a).unwrap();
            worst = worst.max(rel(g, (m * m) as f64));
        }
    }
    outcome(worst <= 1e-9, format!("max relative error {worst:.2e}"))
}

fn expectation_vs_sampling() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for inst in 0..10 {
        let env = WptEnv::new(EnvConfig {
            placement_seed: inst,
            ..EnvConfig::default()
        })
        .unwrap();
        let codes: Vec<usize> = (0..env.tx_count())
            .map(|_| rng.gen_range(0..env.code_count()))
            .collect();
        let expected = env.energies(&codes).unwrap();
        for (j, e) in expected.iter().enumerate() {
            let s = env
                .sample_energy(
                    j,
                    &codes,
                    100_000,
                    SignalModel::ComplexGaussian,
                    inst * 100 + j as u64,
                )
                .unwrap();
            worst = worst.max(rel(s, *e));
        }
    }
    outcome(
        worst < 0.01,
        format!("50 receivers, max relative deviation {:.3}%", worst * 100.0),
    )
}

fn rollout_joint_equivalence() -> Outcome {
    let env = WptEnv::new(EnvConfig {
        max_steps: 1000,
        ..EnvConfig::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut state = env.reset();
    let mut mismatches = 0;
    for _ in 0..100 {
        let action: Vec<usize> = (0..env.tx_count())
            .map(|_| rng.gen_range(0..env.code_count()))
            .collect();
        let joint = env.step_joint(&state, &action).unwrap();
        let mut s = state.clone();
        let mut last = None;
        for (agent, &a) in action.iter().enumerate() {
            let r = env.step_rollout(&s, agent, a).unwrap();
            s = r.next.clone();
            last = Some(r);
        }
        let last = last.unwrap();
        let same_bits = last
            .next
            .energies
            .iter()
            .zip(&joint.next.energies)
            .all(|(a, b)| a.to_bits() == b.to_bits())
            && last.next.prev_total.to_bits() == joint.next.prev_total.to_bits()
            && last.next == joint.next
            && last.reward.to_bits() == joint.reward.to_bits()
            && last.done == joint.done;
        if !same_bits {
            mismatches += 1;
        }
        state = joint.next;
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} of 100 committed states differ"),
    )
}

fn action_space_reduction() -> Outcome {
    let r = run_oracle(&RunConfig::default()).unwrap();
    let ok = r.tx_count == 4
        && r.code_count == 8
        && r.exhaustive.evaluations == 4096
        && r.greedy.evaluations == 32;
    outcome(
        ok,
        format!(
            "{} joint vs {} sequential evaluations",
            r.exhaustive.evaluations, r.greedy.evaluations
        ),
    )
}

fn separability() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let env = WptEnv::new(EnvConfig {
            placement_seed: seed,
            ..EnvConfig::default()
        })
        .unwrap();
        let e = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP).unwrap();
        let g = greedy_sequential_search(env.links(), 0.5, 0.0);
        worst = worst.max(rel(e.total, g.total));
    }
    outcome(
        worst <= 1e-9,
        format!("20 instances, max relative gap {worst:.2e}"),
    )
}

fn tabular_reaches_oracle() -> Outcome {
    let env = small_instance();
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP).unwrap();
    let cfg = LearnerConfig::default();
    let mut hits = 0;
    for seed in 0..20 {
        let out = train_tabular_rollout(
            &env,
            &cfg,
            TrainOptions {
                episodes: 2000,
                seed,
                timing: false,
            },
        )
        .unwrap();
        let eval = evaluate_greedy(&env, &mut out.agent.greedy()).unwrap();
        if eval.peak_codes == oracle.codes {
            hits += 1;
        }
    }
    outcome(
        hits >= 18,
        format!("{hits}/20 seeds commit the optimum {:?}", oracle.codes),
    )
}

/// Norm-wise relative error between analytic and central-difference gradients.
fn gradient_error(params: &MlpParams, analytic: &MlpGrad, f: impl Fn(&MlpParams) -> f64) -> f64 {
    let h = 1e-6;
    let g = analytic.flat();
    let mut p = params.clone();
    let mut num = vec![0.0; g.len()];
    for (i, n) in num.iter_mut().enumerate() {
        let x = *p.param_mut(i);
        *p.param_mut(i) = x + h;
        let up = f(&p);
        *p.param_mut(i) = x - h;
        let down = f(&p);
        *p.param_mut(i) = x;
        *n = (up - down) / (2.0 * h);
    }
    let diff: f64 = g
        .iter()
        .zip(&num)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = g
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(num.iter().map(|a| a * a).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn actor_critic_sanity() -> Outcome {
    // gradient checks
    let mut worst_actor: f64 = 0.0;
    let mut worst_critic: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let dim = 5;
        let theta = MlpParams::new(dim, 12, 4, Head::Softmax, &mut rng);
        let samples: Vec<ActorSample> = random_obs(&mut rng, 6, dim)
            .into_iter()
            .map(|observation| ActorSample {
                observation,
                action: rng.gen_range(0..4),
            })
            .collect();
        let adv: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = actor_gradient(&theta, &samples, &adv).unwrap();
        worst_actor = worst_actor.max(gradient_error(&theta, &g, |p| {
            actor_objective(p, &samples, &adv).unwrap()
        }));

        let w = MlpParams::new(dim, 12, 1, Head::Scalar, &mut rng);
        let obs = random_obs(&mut rng, 7, dim);
        let samples: Vec<CriticSample> = (0..6)
            .map(|t| CriticSample {
                observation: obs[t].clone(),
                reward: rng.gen_range(-3.0..1.0),
                next: (t < 5).then(|| obs[t + 1].clone()),
            })
            .collect();
        let targets = critic_targets(&w, &samples, 0.9).unwrap();
        let g = critic_gradient(&w, &samples, &targets).unwrap();
        worst_critic = worst_critic.max(gradient_error(&w, &g, |p| {
            critic_loss(p, &samples, &targets).unwrap()
        }));
    }
    let grads_ok = worst_actor < 1e-4 && worst_critic < 1e-4;

    // training on the small instance
    let env = small_instance();
    let oracle = exhaustive_search(env.links(), 0.5, 0.0, DEFAULT_ENUMERATION_CAP).unwrap();
    let cfg = LearnerConfig {
        actor_lr: 0.02,
        critic_lr: 0.02,
        hidden: 16,
        ..LearnerConfig::default()
    };
    let mut within = 0;
    for seed in 0..20 {
        let out = train_actor_critic(
            &env,
            &cfg,
            TrainOptions {
                episodes: 1500,
                seed,
                timing: false,
            },
        )
        .unwrap();
        let eval = evaluate_greedy(&env, &mut out.model.greedy()).unwrap();
        if eval.final_total >= 0.95 * oracle.total {
            within += 1;
        }
    }
    outcome(
        grads_ok && within >= 15,
        format!(
            "{within}/20 seeds within 5% of oracle; gradient error actor {worst_actor:.1e}, critic {worst_critic:.1e}"
        ),
    )
}

fn reward_branches() -> Outcome {
    let ok_all = [1.0, 1.0, 1.0];
    let two_short = [1.0, 0.1, 0.1];
    let cases = [
        (2.0, ok_all, 100.0),
        (1.0, ok_all, 0.0),
        (0.5, ok_all, -300.0),
        (2.0, two_short, 0.0),
        (1.0, two_short, -100.0),
        (0.5, two_short, -400.0),
    ];
    let got: Vec<f64> = cases
        .iter()
        .map(|(new, e, _)| reward(1.0, *new, e, 0.5))
        .collect();
    let want: Vec<f64> = cases.iter().map(|c| c.2).collect();
    outcome(got == want, format!("{got:?}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    for kind in AgentKind::ALL {
        let run = |name: &str| {
            let mut cfg = RunConfig {
                agent: kind,
                episodes: 150,
                seed: 11,
                out: dir.path().join(format!("{kind}-{name}")),
                ..RunConfig::default()
            };
            cfg.env.tx_positions = vec![(0.0, 0.0), (30.0, 0.0)];
            cfg.env.codebook_size = 4;
            cfg.env.rx_count = 3;
            cfg.env.max_steps = 30;
            cfg.learner.hidden = 16;
            std::fs::read(run_training(&cfg).unwrap().metrics_path).unwrap()
        };
        if run("a") == run("b") {
            identical += 1;
        }
    }
    outcome(
        identical == 3,
        format!("{identical}/3 agent kinds write identical metrics"),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        (
            "1 matched-beam gain",
            matched_beam_gain,
            Duration::from_secs(1),
        ),
        (
            "2 expectation vs sampling",
            expectation_vs_sampling,
            Duration::from_secs(30),
        ),
        (
            "3 rollout/joint equivalence",
            rollout_joint_equivalence,
            Duration::from_secs(5),
        ),
        (
            "4 action-space reduction",
            action_space_reduction,
            Duration::from_secs(5),
        ),
        (
            "5 separability oracle",
            separability,
            Duration::from_secs(10),
        ),
        (
            "6 tabular learning reaches oracle",
            tabular_reaches_oracle,
            Duration::from_secs(60),
        ),
        (
            "7 actor-critic sanity",
            actor_critic_sanity,
            Duration::from_secs(300),
        ),
        ("8 reward branches", reward_branches, Duration::from_secs(1)),
        ("9 determinism", determinism, Duration::from_secs(60)),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let pass = o.pass && took <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} ({:.2}s, budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
