//! Advantage actor-critic over the rollout MDP.
//!
//! Each transmitter owns an actor network (or all share one) mapping the
//! observation of the intermediate state it acts in to a softmax over codes.
//! A single critic estimates the state value used as the baseline. The
//! advantage of step `t` is the discounted episode return `G_t` minus the
//! critic's estimate. The critic regresses on bootstrapped one-step targets
//! `r + gamma * v(s')`, with the target held fixed during differentiation.
//!
//! With more than one worker, each worker runs its own environment copy,
//! computes gradients against a snapshot of the shared parameters and applies
//! them under a lock (asynchronous advantage actor-critic). Only the
//! single-worker run is reproducible bit-for-bit.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::discounted_gain;
use super::mlp::{Head, MlpGrad, MlpParams};
use super::rollout::{rollout_episode, EpisodeStats, EpisodeTrace, RolloutPolicy};
use super::tabular::{argmax, elapsed_ms, episode_env, TrainOptions};
use super::{rng_for, LearnerConfig};
use crate::env::{EnvState, WptEnv};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CriticSample {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// `None` for the terminal transition.
    pub next: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorSample {
    pub observation: Vec<f64>,
    pub action: usize,
}

fn value(w: &MlpParams, x: &[f64]) -> Result<f64> {
    Ok(w.forward_cached(x)?.raw[0])
}

/// Bootstrapped targets `r + gamma * v(s')` under the current critic.
pub fn critic_targets(w: &MlpParams, samples: &[CriticSample], gamma: f64) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| {
            Ok(s.reward
                + match &s.next {
                    Some(n) => gamma * value(w, n)?,
                    None => 0.0,
                })
        })
        .collect()
}

/// `0.5 * mean (v(s) - y)^2` for fixed targets `y`.
pub fn critic_loss(w: &MlpParams, samples: &[CriticSample], targets: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (s, y) in samples.iter().zip(targets) {
        let e = value(w, &s.observation)? - y;
        sum += 0.5 * e * e;
    }
    Ok(sum / samples.len() as f64)
}

pub fn critic_gradient(
    w: &MlpParams,
    samples: &[CriticSample],
    targets: &[f64],
) -> Result<MlpGrad> {
    let mut grad = MlpGrad::zeros_like(w);
    let k = 1.0 / samples.len() as f64;
    for (s, y) in samples.iter().zip(targets) {
        let cache = w.forward_cached(&s.observation)?;
        let err = cache.raw[0] - y;
        w.backward_into(&cache, &[err], k, &mut grad);
    }
    Ok(grad)
}

/// One gradient-descent step on the critic; returns the loss before the step.
pub fn critic_step(
    w: &mut MlpParams,
    samples: &[CriticSample],
    gamma: f64,
    lr: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("critic step needs at least one sample"));
    }
    let targets = critic_targets(w, samples, gamma)?;
    let loss = critic_loss(w, samples, &targets)?;
    let grad = critic_gradient(w, samples, &targets)?;
    if !loss.is_finite() || !grad.is_finite() {
        return Err(Error::Numerical(format!(
            "critic loss {loss} or gradient not finite"
        )));
    }
    w.apply(&grad, -lr);
    Ok(loss)
}

/// `mean A_t * ln pi(a_t | s_t)`.
pub fn actor_objective(
    theta: &MlpParams,
    samples: &[ActorSample],
    advantages: &[f64],
) -> Result<f64> {
    let mut sum = 0.0;
    for (s, a) in samples.iter().zip(advantages) {
        let p = theta.forward(&s.observation)?;
        sum += a * p[s.action].ln();
    }
    Ok(sum / samples.len() as f64)
}

pub fn actor_gradient(
    theta: &MlpParams,
    samples: &[ActorSample],
    advantages: &[f64],
) -> Result<MlpGrad> {
    if theta.head != Head::Softmax {
        return Err(Error::invalid("actor network needs a softmax head"));
    }
    if samples.len() != advantages.len() {
        return Err(Error::invalid("one advantage per actor sample required"));
    }
    let mut grad = MlpGrad::zeros_like(theta);
    let k = 1.0 / samples.len() as f64;
    for (s, adv) in samples.iter().zip(advantages) {
        let cache = theta.forward_cached(&s.observation)?;
        let p = super::mlp::softmax(&cache.raw);
        // d ln softmax(z)[a] / dz = onehot(a) - p
        let d: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(i, pi)| adv * (f64::from(u8::from(i == s.action)) - pi))
            .collect();
        theta.backward_into(&cache, &d, k, &mut grad);
    }
    Ok(grad)
}

/// One gradient-ascent step on the policy objective.
pub fn actor_step(
    theta: &mut MlpParams,
    samples: &[ActorSample],
    advantages: &[f64],
    lr: f64,
) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("actor step needs at least one sample"));
    }
    let grad = actor_gradient(theta, samples, advantages)?;
    if !grad.is_finite() {
        return Err(Error::Numerical("actor gradient not finite".into()));
    }
    theta.apply(&grad, lr);
    Ok(())
}

/// Scales raw observations into roughly unit range before they reach the networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsEncoder {
    pub energy_scale: f64,
    pub code_scale: f64,
    pub rx_count: usize,
}

impl ObsEncoder {
    /// Energies divided by the largest energy any receiver can collect; codes by `N - 1`.
    pub fn for_env(env: &WptEnv) -> Self {
        let links = env.links();
        let duration = env.config().transfer_duration;
        let energy_scale = (0..env.rx_count())
            .map(|j| {
                duration
                    * (0..env.tx_count())
                        .map(|p| {
                            (0..env.code_count())
                                .map(|i| links.gain(j, p, i))
                                .fold(0.0, f64::max)
                        })
                        .sum::<f64>()
            })
            .fold(0.0, f64::max);
        Self {
            energy_scale: if energy_scale > 0.0 {
                energy_scale
            } else {
                1.0
            },
            code_scale: (env.code_count().max(2) - 1) as f64,
            rx_count: env.rx_count(),
        }
    }

    pub fn encode(&self, observation: &[f64]) -> Vec<f64> {
        observation
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i < self.rx_count {
                    v / self.energy_scale
                } else if v < 0.0 {
                    -1.0
                } else {
                    v / self.code_scale
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    /// One per transmitter, or a single shared actor.
    pub actors: Vec<MlpParams>,
    pub critic: MlpParams,
    pub encoder: ObsEncoder,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(env: &WptEnv, cfg: &LearnerConfig, rng: &mut R) -> Self {
        let input = env.observation_len();
        let actor_count = if cfg.share_policy { 1 } else { env.tx_count() };
        let actors = (0..actor_count)
            .map(|_| MlpParams::new(input, cfg.hidden, env.code_count(), Head::Softmax, rng))
            .collect();
        let critic = MlpParams::new(input, cfg.hidden, 1, Head::Scalar, rng);
        Self {
            actors,
            critic,
            encoder: ObsEncoder::for_env(env),
        }
    }

    pub fn actor_for(&self, agent: usize) -> &MlpParams {
        &self.actors[agent.min(self.actors.len() - 1)]
    }

    fn actor_index(&self, agent: usize) -> usize {
        agent.min(self.actors.len() - 1)
    }

    /// Named networks for checkpointing.
    pub fn networks(&self) -> Vec<(String, MlpParams)> {
        let mut nets: Vec<(String, MlpParams)> = self
            .actors
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("actor{i}"), a.clone()))
            .collect();
        nets.push(("critic".into(), self.critic.clone()));
        nets
    }

    pub fn greedy(&self) -> AcPolicy<'_> {
        AcPolicy {
            model: self,
            rng: None,
        }
    }

    pub fn sampling<'a>(&'a self, rng: &'a mut ChaCha8Rng) -> AcPolicy<'a> {
        AcPolicy {
            model: self,
            rng: Some(rng),
        }
    }

    fn apply(&mut self, grads: &AcGrad, cfg: &LearnerConfig) {
        for (a, g) in self.actors.iter_mut().zip(&grads.actors) {
            if let Some(g) = g {
                a.apply(g, cfg.actor_lr);
            }
        }
        self.critic.apply(&grads.critic, -cfg.critic_lr);
    }
}

/// Acting view of an [`ActorCritic`]: samples from the softmax, or takes its argmax.
pub struct AcPolicy<'a> {
    model: &'a ActorCritic,
    rng: Option<&'a mut ChaCha8Rng>,
}

impl RolloutPolicy for AcPolicy<'_> {
    fn act(&mut self, _env: &WptEnv, state: &EnvState, agent: usize) -> Result<usize> {
        let x = self.model.encoder.encode(&state.observation());
        let p = self.model.actor_for(agent).forward(&x)?;
        Ok(match self.rng.as_deref_mut() {
            None => argmax(&p),
            Some(rng) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                p.iter()
                    .position(|pi| {
                        acc += pi;
                        u < acc
                    })
                    .unwrap_or(p.len() - 1)
            }
        })
    }
}

struct AcGrad {
    actors: Vec<Option<MlpGrad>>,
    critic: MlpGrad,
}

fn episode_gradients(
    model: &ActorCritic,
    trace: &EpisodeTrace,
    cfg: &LearnerConfig,
) -> Result<(AcGrad, f64)> {
    let obs: Vec<Vec<f64>> = trace
        .steps
        .iter()
        .map(|s| model.encoder.encode(&s.observation))
        .collect();
    let rewards: Vec<f64> = trace
        .steps
        .iter()
        .map(|s| s.reward * cfg.reward_scale)
        .collect();
    let gains = discounted_gain(&rewards, cfg.gamma);

    // one critic pass serves targets, loss, gradient and baselines
    let caches = obs
        .iter()
        .map(|x| model.critic.forward_cached(x))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = caches.iter().map(|c| c.raw[0]).collect();
    let mut critic = MlpGrad::zeros_like(&model.critic);
    let mut critic_loss = 0.0;
    let k = 1.0 / obs.len() as f64;
    for t in 0..obs.len() {
        let target = rewards[t] + values.get(t + 1).map_or(0.0, |v| cfg.gamma * v);
        let err = values[t] - target;
        critic_loss += 0.5 * err * err * k;
        model
            .critic
            .backward_into(&caches[t], &[err], k, &mut critic);
    }

    let mut per_actor: Vec<(Vec<ActorSample>, Vec<f64>)> =
        vec![(Vec::new(), Vec::new()); model.actors.len()];
    for (t, step) in trace.steps.iter().enumerate() {
        let baseline = values[t];
        let slot = &mut per_actor[model.actor_index(step.agent)];
        slot.0.push(ActorSample {
            observation: obs[t].clone(),
            action: step.action,
        });
        slot.1.push(gains[t] - baseline);
    }
    let actors = per_actor
        .iter()
        .enumerate()
        .map(|(i, (samples, adv))| {
            if samples.is_empty() {
                Ok(None)
            } else {
                actor_gradient(&model.actors[i], samples, adv).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let finite = critic_loss.is_finite()
        && critic.is_finite()
        && actors.iter().flatten().all(MlpGrad::is_finite);
    if !finite {
        return Err(Error::Numerical(format!(
            "non-finite loss or gradient (critic loss {critic_loss})"
        )));
    }
    Ok((AcGrad { actors, critic }, critic_loss))
}

#[derive(Debug, Clone)]
pub struct AcOutcome {
    pub model: ActorCritic,
    pub metrics: Vec<EpisodeStats>,
}

/// Advantage actor-critic training; `cfg.workers` threads share one parameter set.
pub fn train_actor_critic(
    env: &WptEnv,
    cfg: &LearnerConfig,
    opts: TrainOptions,
) -> Result<AcOutcome> {
    cfg.validate()?;
    let mut init_rng = rng_for(opts.seed, "init");
    let shared = Mutex::new(ActorCritic::new(env, cfg, &mut init_rng));
    let next_episode = AtomicUsize::new(0);
    let metrics = Mutex::new(Vec::with_capacity(opts.episodes));

    let worker = |w: usize| -> Result<()> {
        let mut rng = rng_for(opts.seed, &format!("policy/worker{w}"));
        loop {
            let episode = next_episode.fetch_add(1, Ordering::SeqCst);
            if episode >= opts.episodes {
                return Ok(());
            }
            let start = opts.timing.then(Instant::now);
            let fresh = episode_env(env, opts.seed, episode)?;
            let env = fresh.as_ref().unwrap_or(env);
            let snapshot = shared.lock().expect("parameter lock poisoned").clone();
            let trace = rollout_episode(env, env.reset(), &mut snapshot.sampling(&mut rng))?;
            let (grads, _) = episode_gradients(&snapshot, &trace, cfg).map_err(|e| match e {
                Error::Numerical(m) => Error::Numerical(format!("episode {episode}: {m}")),
                other => other,
            })?;
            {
                let mut params = shared.lock().expect("parameter lock poisoned");
                params.apply(&grads, cfg);
                if !params.critic.is_finite() || params.actors.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "episode {episode}: parameters diverged"
                    )));
                }
            }
            let stats = EpisodeStats::from_trace(episode, &trace, 0.0, elapsed_ms(start));
            metrics.lock().expect("metrics lock poisoned").push(stats);
        }
    };

    if cfg.workers == 1 {
        worker(0)?;
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..cfg.workers)
                .map(|w| s.spawn(move || worker(w)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Result<Vec<()>>>()
        })?;
    }

    let mut metrics = metrics.into_inner().expect("metrics lock poisoned");
    metrics.sort_by_key(|m| m.episode);
    Ok(AcOutcome {
        model: shared.into_inner().expect("parameter lock poisoned"),
        metrics,
    })
}
