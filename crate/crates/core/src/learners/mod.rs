//! Reinforcement learning machinery: returns, exploration, tabular Q-learning,
//! small feedforward networks, advantage actor-critic and the sequential
//! multiagent rollout driver.

pub mod actor_critic;
pub mod mlp;
pub mod rollout;
pub mod tabular;

pub use actor_critic::{
    actor_step, critic_step, train_actor_critic, ActorCritic, ActorSample, CriticSample,
};
pub use mlp::{Head, MlpParams};
pub use rollout::{
    evaluate_greedy, rollout_episode, EpisodeStats, EpisodeTrace, GreedyEval, RolloutPolicy,
};
pub use tabular::{
    epsilon_greedy, q_update, train_joint_tabular, train_tabular_rollout, QTable, StateKey,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Exponential exploration decay `max(floor, decay^episode)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub decay: f64,
    pub floor: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            decay: 0.995,
            floor: 0.01,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize) -> f64 {
        let e = i32::try_from(episode).map_or(0.0, |n| self.decay.powi(n));
        e.max(self.floor).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Discount rate.
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub q_lr: f64,
    pub epsilon: EpsilonSchedule,
    pub hidden: usize,
    pub workers: usize,
    /// One actor network for all transmitters instead of one each.
    pub share_policy: bool,
    /// Multiplier applied to environment rewards before learning.
    pub reward_scale: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            actor_lr: 0.1,
            critic_lr: 0.1,
            q_lr: 0.1,
            epsilon: EpsilonSchedule::default(),
            hidden: 64,
            workers: 1,
            share_policy: false,
            reward_scale: 0.01,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma must lie in [0, 1]"));
        }
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("q_lr", self.q_lr),
            ("reward_scale", self.reward_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.epsilon.decay > 0.0 && self.epsilon.decay <= 1.0) {
            return Err(Error::invalid("epsilon decay must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.epsilon.floor) {
            return Err(Error::invalid("epsilon floor must lie in [0, 1]"));
        }
        if self.hidden == 0 {
            return Err(Error::invalid("hidden width must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("need at least one worker"));
        }
        Ok(())
    }
}

/// Discounted gains `G_t = R_t + gamma * G_{t+1}`, with `G_T = R_T`.
pub fn discounted_gain(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut gains = vec![0.0; rewards.len()];
    let mut next = 0.0;
    for (g, r) in gains.iter_mut().zip(rewards).rev() {
        next = r + gamma * next;
        *g = next;
    }
    gains
}

/// Derive an independent stream seed from a master seed and a stream name.
pub fn sub_seed(seed: u64, stream: &str) -> u64 {
    // FNV-1a over the stream name, folded into a splitmix64 step of the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains_of_unit_rewards() {
        let g = discounted_gain(&[1.0, 1.0, 1.0], 0.9);
        assert!((g[0] - 2.71).abs() < 1e-12);
        assert!((g[1] - 1.9).abs() < 1e-12);
        assert_eq!(g[2], 1.0);
    }

    #[test]
    fn myopic_gains() {
        let r = [3.0, -1.0, 2.5];
        assert_eq!(discounted_gain(&r, 0.0), r.to_vec());
        assert!(discounted_gain(&[], 0.9).is_empty());
    }

    #[test]
    fn gains_satisfy_recursion() {
        let r: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let g = discounted_gain(&r, 0.9);
        for t in 0..r.len() - 1 {
            assert!((g[t] - r[t] - 0.9 * g[t + 1]).abs() < 1e-9);
        }
        assert_eq!(g[r.len() - 1], r[r.len() - 1]);
    }

    #[test]
    fn epsilon_schedule() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.at(0), 1.0);
        for n in 0..3000 {
            assert!(s.at(n + 1) <= s.at(n));
        }
        // 0.995^919 < 0.01 < 0.995^918
        assert!(s.at(918) > 0.01);
        assert_eq!(s.at(919), 0.01);
        assert_eq!(s.at(100_000), 0.01);
        assert_eq!(s.at(usize::MAX), 0.01);
    }

    #[test]
    fn sub_seeds_differ_by_stream() {
        assert_ne!(sub_seed(1, "placement"), sub_seed(1, "policy"));
        assert_ne!(sub_seed(1, "policy"), sub_seed(2, "policy"));
        assert_eq!(sub_seed(9, "x"), sub_seed(9, "x"));
    }

    #[test]
    fn config_validation() {
        assert!(LearnerConfig::default().validate().is_ok());
        let bad = LearnerConfig {
            gamma: 1.5,
            ..LearnerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LearnerConfig {
            workers: 0,
            ..LearnerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
