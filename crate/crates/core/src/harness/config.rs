//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Missing keys keep their
//! defaults; unknown or repeated keys are errors. Angles are in radians,
//! point lists are written `x,y; x,y; ...`.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::array::Point;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::learners::{sub_seed, LearnerConfig};
use crate::oracle::DEFAULT_ENUMERATION_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    TabularRollout,
    ActorCriticRollout,
    JointTabular,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [
        AgentKind::TabularRollout,
        AgentKind::ActorCriticRollout,
        AgentKind::JointTabular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::TabularRollout => "tabular-rollout",
            AgentKind::ActorCriticRollout => "actor-critic-rollout",
            AgentKind::JointTabular => "joint-tabular",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                format!("unknown agent `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    pub agent: AgentKind,
    pub episodes: usize,
    pub seed: u64,
    /// Receiver placement seed; derived from `seed` when unset.
    pub placement_seed: Option<u64>,
    pub out: PathBuf,
    pub timing: bool,
    pub enum_cap: u128,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            learner: LearnerConfig::default(),
            agent: AgentKind::TabularRollout,
            episodes: 1000,
            seed: 0,
            placement_seed: None,
            out: PathBuf::from("runs"),
            timing: false,
            enum_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::invalid("episodes must be at least 1"));
        }
        if self.enum_cap == 0 {
            return Err(Error::invalid("enum_cap must be positive"));
        }
        self.env.validate()?;
        self.learner.validate()
    }

    /// Environment config with the placement seed resolved.
    pub fn effective_env(&self) -> EnvConfig {
        EnvConfig {
            placement_seed: self
                .placement_seed
                .unwrap_or_else(|| sub_seed(self.seed, "placement")),
            ..self.env.clone()
        }
    }

    /// Text form accepted by [`parse_config`]; reloading it yields an equal config.
    pub fn to_text(&self) -> String {
        let e = &self.env;
        let l = &self.learner;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("agent", self.agent.to_string());
        put("episodes", self.episodes.to_string());
        put("seed", self.seed.to_string());
        if let Some(p) = self.placement_seed {
            put("placement_seed", p.to_string());
        }
        put("out", self.out.display().to_string());
        put("timing", self.timing.to_string());
        put("enum_cap", self.enum_cap.to_string());

        put("tx_positions", points_to_text(&e.tx_positions));
        put("field_bounds", points_to_text(&[e.field_bounds]));
        put("rx_count", e.rx_count.to_string());
        if let Some(rx) = &e.rx_positions {
            put("rx_positions", points_to_text(rx));
        }
        put(
            "resample_rx_per_episode",
            e.resample_rx_per_episode.to_string(),
        );
        put("elements", e.array.elements.to_string());
        put("spacing_phase", e.array.spacing_phase.to_string());
        put("carrier_hz", e.array.carrier_hz.to_string());
        if let Some(b) = &e.tx_boresights {
            put("tx_boresights", list_to_text(b));
        }
        put("codebook_size", e.codebook_size.to_string());
        put("codebook_range", e.codebook_range.to_string());
        put("codebook_center", e.codebook_center.to_string());
        put("transfer_duration", e.transfer_duration.to_string());
        put("e_min", e.e_min.to_string());
        put("max_steps", e.max_steps.to_string());

        put("gamma", l.gamma.to_string());
        put("actor_lr", l.actor_lr.to_string());
        put("critic_lr", l.critic_lr.to_string());
        put("q_lr", l.q_lr.to_string());
        put("epsilon_decay", l.epsilon.decay.to_string());
        put("epsilon_floor", l.epsilon.floor.to_string());
        put("hidden", l.hidden.to_string());
        put("workers", l.workers.to_string());
        put("share_policy", l.share_policy.to_string());
        put("reward_scale", l.reward_scale.to_string());
        s
    }
}

fn points_to_text(points: &[Point]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join("; ")
}

fn list_to_text(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn parse_num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse()
        .map_err(|_| format!("cannot parse `{v}` as a number"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',').map(|x| parse_num(x.trim())).collect()
}

fn parse_points(v: &str) -> std::result::Result<Vec<Point>, String> {
    v.split(';')
        .map(|p| match parse_list(p)?.as_slice() {
            &[x, y] => Ok((x, y)),
            _ => Err(format!("expected `x,y`, got `{}`", p.trim())),
        })
        .collect()
}

fn parse_point(v: &str) -> std::result::Result<Point, String> {
    match parse_points(v)?.as_slice() {
        &[p] => Ok(p),
        _ => Err("expected a single `x,y` pair".into()),
    }
}

/// Apply one `key = value` assignment. `Ok(false)` means the key is unknown.
fn assign(cfg: &mut RunConfig, key: &str, v: &str) -> std::result::Result<bool, String> {
    let e = &mut cfg.env;
    let l = &mut cfg.learner;
    match key {
        "agent" => cfg.agent = v.parse()?,
        "episodes" => cfg.episodes = parse_num(v)?,
        "seed" => cfg.seed = parse_num(v)?,
        "placement_seed" => cfg.placement_seed = Some(parse_num(v)?),
        "out" => cfg.out = PathBuf::from(v),
        "timing" => cfg.timing = parse_bool(v)?,
        "enum_cap" => cfg.enum_cap = parse_num(v)?,
        "tx_positions" => e.tx_positions = parse_points(v)?,
        "field_bounds" => e.field_bounds = parse_point(v)?,
        "rx_count" => e.rx_count = parse_num(v)?,
        "rx_positions" => e.rx_positions = Some(parse_points(v)?),
        "resample_rx_per_episode" => e.resample_rx_per_episode = parse_bool(v)?,
        "elements" => e.array.elements = parse_num(v)?,
        "spacing_phase" => e.array.spacing_phase = parse_num(v)?,
        "carrier_hz" => e.array.carrier_hz = parse_num(v)?,
        "tx_boresights" => e.tx_boresights = Some(parse_list(v)?),
        "codebook_size" => e.codebook_size = parse_num(v)?,
        "codebook_range" => e.codebook_range = parse_num(v)?,
        "codebook_center" => e.codebook_center = parse_num(v)?,
        "transfer_duration" => e.transfer_duration = parse_num(v)?,
        "e_min" => e.e_min = parse_num(v)?,
        "max_steps" => e.max_steps = parse_num(v)?,
        "gamma" => l.gamma = parse_num(v)?,
        "actor_lr" => l.actor_lr = parse_num(v)?,
        "critic_lr" => l.critic_lr = parse_num(v)?,
        "q_lr" => l.q_lr = parse_num(v)?,
        "epsilon_decay" => l.epsilon.decay = parse_num(v)?,
        "epsilon_floor" => l.epsilon.floor = parse_num(v)?,
        "hidden" => l.hidden = parse_num(v)?,
        "workers" => l.workers = parse_num(v)?,
        "share_policy" => l.share_policy = parse_bool(v)?,
        "reward_scale" => l.reward_scale = parse_num(v)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Parse config text without validating the result.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Config {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(Error::Config {
                line,
                msg: format!("`{key}` set twice"),
            });
        }
        match assign(&mut cfg, key, value) {
            Ok(true) => seen.push(key.to_string()),
            Ok(false) => {
                return Err(Error::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
            Err(msg) => {
                return Err(Error::Config {
                    line,
                    msg: format!("{key}: {msg}"),
                })
            }
        }
    }
    Ok(cfg)
}

/// Read and parse a config file. Validation is left to the caller so that
/// command-line overrides can be applied first.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
