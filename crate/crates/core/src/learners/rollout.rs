//! Sequential multiagent rollout.
//!
//! Each full step is split into `L` agent decisions. Agent `k` sees the
//! intermediate state carrying the choices of agents `0..k` and picks one of
//! `N` codes, so a full step scores `N * L` options instead of `N^L`.

use crate::env::{EnvState, WptEnv};
use crate::error::Result;

/// One agent decision inside a rollout episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub observation: Vec<f64>,
    pub agent: usize,
    pub action: usize,
    pub reward: f64,
}

/// State of the network after the last agent of a full step committed.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitRecord {
    pub codes: Vec<usize>,
    pub total: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    /// `S_t, A_t^1, R_t^1, S_t^1, A_t^2, ...` flattened in order.
    pub steps: Vec<TraceStep>,
    pub commits: Vec<CommitRecord>,
    /// Candidate actions scored by the policies.
    pub evaluations: u64,
    pub final_state: EnvState,
}

impl EpisodeTrace {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// Commit with the highest total; the earliest one wins ties.
    pub fn peak(&self) -> Option<&CommitRecord> {
        self.commits
            .iter()
            .reduce(|best, c| if c.total > best.total { c } else { best })
    }
}

/// A transition handed to [`RolloutPolicy::observe`] after every agent decision.
#[derive(Debug)]
pub struct Transition<'a> {
    pub state: &'a EnvState,
    pub agent: usize,
    pub action: usize,
    pub reward: f64,
    pub next: &'a EnvState,
    pub done: bool,
}

pub trait RolloutPolicy {
    /// Choose a code for `agent` in the (possibly intermediate) `state`.
    fn act(&mut self, env: &WptEnv, state: &EnvState, agent: usize) -> Result<usize>;

    /// Hook for online learners; called after each decision.
    fn observe(&mut self, _env: &WptEnv, _transition: &Transition<'_>) -> Result<()> {
        Ok(())
    }

    /// Candidate actions scored per decision.
    fn evaluations_per_decision(&self, env: &WptEnv) -> u64 {
        env.code_count() as u64
    }
}

/// Run full steps from `state` until the episode ends.
pub fn rollout_episode<P: RolloutPolicy + ?Sized>(
    env: &WptEnv,
    mut state: EnvState,
    policy: &mut P,
) -> Result<EpisodeTrace> {
    let l = env.tx_count();
    let mut steps = Vec::with_capacity(env.config().max_steps.saturating_sub(state.step_count) * l);
    let mut commits = Vec::new();
    let mut evaluations = 0;
    loop {
        let first = state.partial.len();
        let mut done = false;
        for agent in first..l {
            let action = policy.act(env, &state, agent)?;
            evaluations += policy.evaluations_per_decision(env);
            let result = env.step_rollout(&state, agent, action)?;
            policy.observe(
                env,
                &Transition {
                    state: &state,
                    agent,
                    action,
                    reward: result.reward,
                    next: &result.next,
                    done: result.done,
                },
            )?;
            steps.push(TraceStep {
                observation: state.observation(),
                agent,
                action,
                reward: result.reward,
            });
            state = result.next;
            done = result.done;
        }
        let codes = state
            .committed_codes()
            .expect("full step commits every code");
        commits.push(CommitRecord {
            codes,
            total: state.prev_total,
            feasible_count: env.feasible_count(&state.energies),
        });
        if done {
            break;
        }
    }
    Ok(EpisodeTrace {
        steps,
        commits,
        evaluations,
        final_state: state,
    })
}

/// Per-episode summary used for metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    /// Highest committed total energy reached during the episode.
    pub total_energy: f64,
    /// Sum of environment rewards (unscaled).
    pub reward: f64,
    /// Receivers meeting `e_min` at the peak commit.
    pub feasible_count: usize,
    pub epsilon: f64,
    pub wall_ms: f64,
}

impl EpisodeStats {
    pub fn from_trace(episode: usize, trace: &EpisodeTrace, epsilon: f64, wall_ms: f64) -> Self {
        let (total_energy, feasible_count) = trace
            .peak()
            .map_or((0.0, 0), |c| (c.total, c.feasible_count));
        Self {
            episode,
            total_energy,
            reward: trace.total_reward(),
            feasible_count,
            epsilon,
            wall_ms,
        }
    }
}

/// Result of running a deterministic greedy policy for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyEval {
    pub peak_codes: Vec<usize>,
    pub peak_total: f64,
    pub final_codes: Vec<usize>,
    pub final_total: f64,
    /// Every distinct committed assignment, in order of first visit.
    pub visited: Vec<Vec<usize>>,
}

impl GreedyEval {
    pub fn visits(&self, codes: &[usize]) -> bool {
        self.visited.iter().any(|v| v == codes)
    }
}

/// Run `policy` (expected to act greedily) for one episode from reset.
pub fn evaluate_greedy<P: RolloutPolicy + ?Sized>(
    env: &WptEnv,
    policy: &mut P,
) -> Result<GreedyEval> {
    let trace = rollout_episode(env, env.reset(), policy)?;
    let peak = trace
        .peak()
        .expect("episode has at least one commit")
        .clone();
    let last = trace
        .commits
        .last()
        .expect("episode has at least one commit")
        .clone();
    let mut visited: Vec<Vec<usize>> = Vec::new();
    for c in &trace.commits {
        if !visited.contains(&c.codes) {
            visited.push(c.codes.clone());
        }
    }
    Ok(GreedyEval {
        peak_codes: peak.codes,
        peak_total: peak.total,
        final_codes: last.codes,
        final_total: last.total,
        visited,
    })
}

/// Each agent picks the code with the largest own contribution to the total.
/// With no energy floor this reproduces the greedy sequential search.
#[derive(Debug, Default, Clone, Copy)]
pub struct GreedyOraclePolicy;

impl RolloutPolicy for GreedyOraclePolicy {
    fn act(&mut self, env: &WptEnv, _state: &EnvState, agent: usize) -> Result<usize> {
        let links = env.links();
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for i in 0..env.code_count() {
            let g: f64 = (0..env.rx_count()).map(|j| links.gain(j, agent, i)).sum();
            if g > best_gain {
                best = i;
                best_gain = g;
            }
        }
        Ok(best)
    }
}

/// Fixed joint action, replayed every full step.
#[derive(Debug, Clone)]
pub struct FixedPolicy(pub Vec<usize>);

impl RolloutPolicy for FixedPolicy {
    fn act(&mut self, _env: &WptEnv, _state: &EnvState, agent: usize) -> Result<usize> {
        Ok(self.0[agent])
    }

    fn evaluations_per_decision(&self, _env: &WptEnv) -> u64 {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvConfig;
    use crate::oracle::greedy_sequential_search;

    fn env() -> WptEnv {
        WptEnv::new(EnvConfig {
            max_steps: 5,
            placement_seed: 3,
            ..EnvConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn greedy_oracle_first_step_matches_sequential_search() {
        let env = env();
        let trace = rollout_episode(&env, env.reset(), &mut GreedyOraclePolicy).unwrap();
        let g = greedy_sequential_search(env.links(), env.config().transfer_duration, 0.0);
        assert_eq!(trace.commits[0].codes, g.codes);
        assert_eq!(trace.commits[0].total, g.total);
    }

    #[test]
    fn trace_shape() {
        let env = env();
        let trace = rollout_episode(&env, env.reset(), &mut GreedyOraclePolicy).unwrap();
        let l = env.tx_count();
        assert_eq!(trace.steps.len(), 5 * l);
        assert_eq!(trace.commits.len(), 5);
        for (t, s) in trace.steps.iter().enumerate() {
            assert_eq!(s.agent, t % l);
            assert_eq!(s.observation.len(), env.observation_len());
        }
        assert!(trace.evaluations <= (5 * env.code_count() * l) as u64);
        assert!(trace.final_state.step_count == 5);
        // the greedy assignment repeats after the first step: +100 each sub-step, then flat
        let r = trace.rewards();
        assert!(r[..l].iter().all(|&x| x == 100.0));
        assert!(r[l..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn resumes_mid_episode() {
        let env = env();
        let s = env.step_rollout(&env.reset(), 0, 1).unwrap().next;
        let trace = rollout_episode(&env, s, &mut FixedPolicy(vec![1, 2, 3, 4])).unwrap();
        assert_eq!(trace.steps.len(), 5 * 4 - 1);
        assert_eq!(trace.steps[0].agent, 1);
        assert_eq!(trace.commits[0].codes, vec![1, 2, 3, 4]);
    }

    #[test]
    fn greedy_eval_tracks_visits() {
        let env = env();
        let e = evaluate_greedy(&env, &mut FixedPolicy(vec![0, 1, 2, 3])).unwrap();
        assert_eq!(e.visited, vec![vec![0, 1, 2, 3]]);
        assert!(e.visits(&[0, 1, 2, 3]));
        assert_eq!(e.peak_total, e.final_total);
    }
}
