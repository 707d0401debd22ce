//! Tabular Q-learning on the rollout MDP and on the joint-action MDP.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rollout::{rollout_episode, EpisodeStats, RolloutPolicy, Transition};
use super::{rng_for, sub_seed, LearnerConfig};
use crate::env::{EnvState, WptEnv};
use crate::error::{Error, Result};

/// Committed codes plus the actions already taken in the current full step.
///
/// Energies are left out: they are a deterministic function of the codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub codes: Vec<Option<usize>>,
    pub partial: Vec<usize>,
}

impl From<&EnvState> for StateKey {
    fn from(s: &EnvState) -> Self {
        Self {
            codes: s.codes.clone(),
            partial: s.partial.iter().map(|&(_, a)| a).collect(),
        }
    }
}

impl StateKey {
    fn encode(&self) -> String {
        let codes: Vec<String> = self
            .codes
            .iter()
            .map(|c| c.map_or_else(|| "-".to_string(), |c| c.to_string()))
            .collect();
        let partial: Vec<String> = self.partial.iter().map(|a| a.to_string()).collect();
        format!("{}|{}", codes.join(","), partial.join(","))
    }

    fn decode(s: &str) -> Option<Self> {
        let (codes, partial) = s.split_once('|')?;
        let codes = if codes.is_empty() {
            Vec::new()
        } else {
            codes
                .split(',')
                .map(|c| {
                    if c == "-" {
                        Some(None)
                    } else {
                        c.parse().ok().map(Some)
                    }
                })
                .collect::<Option<_>>()?
        };
        let partial = if partial.is_empty() {
            Vec::new()
        } else {
            partial
                .split(',')
                .map(|a| a.parse().ok())
                .collect::<Option<_>>()?
        };
        Some(Self { codes, partial })
    }
}

/// Action values keyed by state; unseen states read as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    actions: usize,
    rows: BTreeMap<StateKey, Vec<f64>>,
}

impl QTable {
    pub fn new(actions: usize) -> Self {
        Self {
            actions,
            rows: BTreeMap::new(),
        }
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, key: &StateKey) -> Vec<f64> {
        self.rows
            .get(key)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.actions])
    }

    pub fn get(&self, key: &StateKey, action: usize) -> f64 {
        self.rows.get(key).map_or(0.0, |r| r[action])
    }

    pub fn set(&mut self, key: StateKey, action: usize, value: f64) {
        let n = self.actions;
        self.rows.entry(key).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    pub fn max(&self, key: &StateKey) -> f64 {
        self.rows
            .get(key)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Text dump with values stored as raw bit patterns, so a reload is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "wpt-qtable v1\nactions {}\nrows {}\n",
            self.actions,
            self.rows.len()
        );
        for (k, row) in &self.rows {
            out.push_str(&k.encode());
            out.push_str(" :");
            for v in row {
                let _ = write!(out, " {:016x}", v.to_bits());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Config {
            line,
            msg: format!("q-table: {msg}"),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "wpt-qtable v1")) => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut field = |name: &str| -> Result<usize> {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated"))?;
            l.strip_prefix(name)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(n, &format!("expected `{name}`")))
        };
        let actions = field("actions")?;
        let count = field("rows")?;
        let mut table = QTable::new(actions);
        for (n, l) in lines {
            let (k, vals) = l.split_once(" :").ok_or_else(|| bad(n, "missing ` :`"))?;
            let key = StateKey::decode(k).ok_or_else(|| bad(n, "bad state key"))?;
            let row = vals
                .split_whitespace()
                .map(|h| u64::from_str_radix(h, 16).map(f64::from_bits))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(n, "bad value"))?;
            if row.len() != actions {
                return Err(bad(n, "wrong row width"));
            }
            table.rows.insert(key, row);
        }
        if table.rows.len() != count {
            return Err(bad(0, "row count mismatch"));
        }
        Ok(table)
    }
}

/// `q(s,a) += lr * (r + gamma * max_a' q(s',a') - q(s,a))`; `next = None` marks a terminal transition.
pub fn q_update(
    table: &mut QTable,
    s: &StateKey,
    a: usize,
    r: f64,
    next: Option<&StateKey>,
    lr: f64,
    gamma: f64,
) {
    let q = table.get(s, a);
    let target = r + next.map_or(0.0, |n| gamma * table.max(n));
    table.set(s.clone(), a, q + lr * (target - q));
}

/// Lowest index among the maxima.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Greedy with probability `1 - epsilon`, uniform otherwise.
pub fn epsilon_greedy<R: Rng + ?Sized>(row: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if row.is_empty() {
        return Err(Error::invalid("empty action-value row"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        Ok(rng.gen_range(0..row.len()))
    } else {
        Ok(argmax(row))
    }
}

/// Q-learning agent acting through the sequential rollout protocol.
#[derive(Debug, Clone)]
pub struct RolloutQAgent {
    pub table: QTable,
    pub lr: f64,
    pub gamma: f64,
    pub reward_scale: f64,
    pub epsilon: f64,
    /// When false, `observe` does not update the table.
    pub learning: bool,
    rng: ChaCha8Rng,
}

impl RolloutQAgent {
    pub fn new(actions: usize, cfg: &LearnerConfig, seed: u64) -> Self {
        Self {
            table: QTable::new(actions),
            lr: cfg.q_lr,
            gamma: cfg.gamma,
            reward_scale: cfg.reward_scale,
            epsilon: 1.0,
            learning: true,
            rng: rng_for(seed, "policy"),
        }
    }

    /// Frozen greedy copy of this agent.
    pub fn greedy(&self) -> Self {
        Self {
            epsilon: 0.0,
            learning: false,
            ..self.clone()
        }
    }
}

impl RolloutPolicy for RolloutQAgent {
    fn act(&mut self, _env: &WptEnv, state: &EnvState, _agent: usize) -> Result<usize> {
        let row = self.table.row(&StateKey::from(state));
        epsilon_greedy(&row, self.epsilon, &mut self.rng)
    }

    fn observe(&mut self, _env: &WptEnv, t: &Transition<'_>) -> Result<()> {
        if self.learning {
            let s = StateKey::from(t.state);
            let next = StateKey::from(t.next);
            let next = (!t.done).then_some(&next);
            q_update(
                &mut self.table,
                &s,
                t.action,
                t.reward * self.reward_scale,
                next,
                self.lr,
                self.gamma,
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    pub episodes: usize,
    pub seed: u64,
    /// Record wall-clock time per episode; off keeps metrics reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct TabularOutcome<A> {
    pub agent: A,
    pub metrics: Vec<EpisodeStats>,
}

pub(crate) fn episode_env(env: &WptEnv, seed: u64, episode: usize) -> Result<Option<WptEnv>> {
    if env.config().resample_rx_per_episode {
        let s = sub_seed(seed, &format!("placement/{episode}"));
        env.reseeded(s).map(Some)
    } else {
        Ok(None)
    }
}

pub(crate) fn elapsed_ms(start: Option<Instant>) -> f64 {
    start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
}

/// Q-learning over the sequential rollout MDP.
pub fn train_tabular_rollout(
    env: &WptEnv,
    cfg: &LearnerConfig,
    opts: TrainOptions,
) -> Result<TabularOutcome<RolloutQAgent>> {
    cfg.validate()?;
    let mut agent = RolloutQAgent::new(env.code_count(), cfg, opts.seed);
    let mut metrics = Vec::with_capacity(opts.episodes);
    for episode in 0..opts.episodes {
        let start = opts.timing.then(Instant::now);
        let fresh = episode_env(env, opts.seed, episode)?;
        let env = fresh.as_ref().unwrap_or(env);
        agent.epsilon = cfg.epsilon.at(episode);
        let trace = rollout_episode(env, env.reset(), &mut agent)?;
        metrics.push(EpisodeStats::from_trace(
            episode,
            &trace,
            agent.epsilon,
            elapsed_ms(start),
        ));
    }
    Ok(TabularOutcome { agent, metrics })
}

/// Baseline Q-learner choosing all `L` codes at once from `N^L` joint actions.
#[derive(Debug, Clone)]
pub struct JointQAgent {
    pub table: QTable,
    code_count: usize,
    tx_count: usize,
}

impl JointQAgent {
    pub fn new(code_count: usize, tx_count: usize) -> Result<Self> {
        let actions = crate::oracle::joint_space_size(code_count, tx_count)
            .and_then(|n| usize::try_from(n).ok())
            .filter(|&n| n <= 1 << 24)
            .ok_or(Error::Resource {
                needed: crate::oracle::joint_space_size(code_count, tx_count).unwrap_or(u128::MAX),
                cap: 1 << 24,
            })?;
        Ok(Self {
            table: QTable::new(actions),
            code_count,
            tx_count,
        })
    }

    /// Joint action index to per-transmitter codes, first transmitter most significant.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut codes = vec![0; self.tx_count];
        for c in codes.iter_mut().rev() {
            *c = index % self.code_count;
            index /= self.code_count;
        }
        codes
    }

    /// Run one episode with joint steps; returns the rollout-style trace.
    pub fn run_episode<R: Rng>(
        &mut self,
        env: &WptEnv,
        cfg: &LearnerConfig,
        epsilon: f64,
        learning: bool,
        rng: &mut R,
    ) -> Result<super::rollout::EpisodeTrace> {
        use super::rollout::{CommitRecord, TraceStep};
        let mut state = env.reset();
        let mut steps = Vec::new();
        let mut commits = Vec::new();
        let mut evaluations = 0u64;
        loop {
            let key = StateKey::from(&state);
            let a = epsilon_greedy(&self.table.row(&key), epsilon, rng)?;
            evaluations += self.table.actions() as u64;
            let codes = self.decode(a);
            let result = env.step_joint(&state, &codes)?;
            if learning {
                let next = StateKey::from(&result.next);
                let next = (!result.done).then_some(&next);
                q_update(
                    &mut self.table,
                    &key,
                    a,
                    result.reward * cfg.reward_scale,
                    next,
                    cfg.q_lr,
                    cfg.gamma,
                );
            }
            steps.push(TraceStep {
                observation: state.observation(),
                agent: 0,
                action: a,
                reward: result.reward,
            });
            state = result.next;
            commits.push(CommitRecord {
                codes,
                total: state.prev_total,
                feasible_count: env.feasible_count(&state.energies),
            });
            if result.done {
                break;
            }
        }
        Ok(super::rollout::EpisodeTrace {
            steps,
            commits,
            evaluations,
            final_state: state,
        })
    }
}

pub fn train_joint_tabular(
    env: &WptEnv,
    cfg: &LearnerConfig,
    opts: TrainOptions,
) -> Result<TabularOutcome<JointQAgent>> {
    cfg.validate()?;
    let mut agent = JointQAgent::new(env.code_count(), env.tx_count())?;
    let mut rng = rng_for(opts.seed, "policy");
    let mut metrics = Vec::with_capacity(opts.episodes);
    for episode in 0..opts.episodes {
        let start = opts.timing.then(Instant::now);
        let fresh = episode_env(env, opts.seed, episode)?;
        let env = fresh.as_ref().unwrap_or(env);
        let epsilon = cfg.epsilon.at(episode);
        let trace = agent.run_episode(env, cfg, epsilon, true, &mut rng)?;
        metrics.push(EpisodeStats::from_trace(
            episode,
            &trace,
            epsilon,
            elapsed_ms(start),
        ));
    }
    Ok(TabularOutcome { agent, metrics })
}
