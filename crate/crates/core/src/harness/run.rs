//! Training and oracle runs driven by a [`RunConfig`].

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use super::config::{AgentKind, RunConfig};
use super::metrics::write_metrics;
use crate::env::WptEnv;
use crate::error::Result;
use crate::learners::mlp::checkpoint_to_text;
use crate::learners::tabular::TrainOptions;
use crate::learners::{
    train_actor_critic, train_joint_tabular, train_tabular_rollout, EpisodeStats,
};
use crate::oracle::{exhaustive_search, greedy_sequential_search, SearchResult};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub metrics: Vec<EpisodeStats>,
}

/// Train the configured agent and write `metrics.csv`, `checkpoint.txt` and
/// the effective `config.txt` into `cfg.out`.
pub fn run_training(cfg: &RunConfig) -> Result<TrainingReport> {
    cfg.validate()?;
    let env = WptEnv::new(cfg.effective_env())?;
    let opts = TrainOptions {
        episodes: cfg.episodes,
        seed: cfg.seed,
        timing: cfg.timing,
    };
    let (metrics, checkpoint) = match cfg.agent {
        AgentKind::TabularRollout => {
            let out = train_tabular_rollout(&env, &cfg.learner, opts)?;
            (out.metrics, out.agent.table.to_text())
        }
        AgentKind::JointTabular => {
            let out = train_joint_tabular(&env, &cfg.learner, opts)?;
            (out.metrics, out.agent.table.to_text())
        }
        AgentKind::ActorCriticRollout => {
            let out = train_actor_critic(&env, &cfg.learner, opts)?;
            (out.metrics, checkpoint_to_text(&out.model.networks()))
        }
    };

    fs::create_dir_all(&cfg.out)?;
    let metrics_path = cfg.out.join(METRICS_FILE);
    write_metrics(BufWriter::new(File::create(&metrics_path)?), &metrics)?;
    let checkpoint_path = cfg.out.join(CHECKPOINT_FILE);
    fs::write(&checkpoint_path, checkpoint)?;
    fs::write(cfg.out.join(CONFIG_FILE), cfg.to_text())?;
    Ok(TrainingReport {
        metrics_path,
        checkpoint_path,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub tx_count: usize,
    pub code_count: usize,
    pub rx_count: usize,
    pub e_min: f64,
    pub exhaustive: SearchResult,
    pub greedy: SearchResult,
}

impl OracleReport {
    /// Single `key=value` line for scripts.
    pub fn machine_line(&self) -> String {
        let codes = |r: &SearchResult| {
            r.codes
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "oracle L={} N={} K={} e_min={} exhaustive_codes={} exhaustive_total={} exhaustive_feasible={} \
             exhaustive_evaluations={} greedy_codes={} greedy_total={} greedy_feasible={} greedy_evaluations={}",
            self.tx_count,
            self.code_count,
            self.rx_count,
            self.e_min,
            codes(&self.exhaustive),
            self.exhaustive.total,
            self.exhaustive.feasible,
            self.exhaustive.evaluations,
            codes(&self.greedy),
            self.greedy.total,
            self.greedy.feasible,
            self.greedy.evaluations,
        )
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} transmitters, {} codes each, {} receivers (e_min {} J)",
            self.tx_count, self.code_count, self.rx_count, self.e_min
        )?;
        for (name, r) in [
            ("exhaustive", &self.exhaustive),
            ("greedy sequential", &self.greedy),
        ] {
            writeln!(
                f,
                "  {name:<18} codes {:?}  total {:.6e} J  {}  {} evaluations",
                r.codes,
                r.total,
                if r.feasible { "feasible" } else { "infeasible" },
                r.evaluations
            )?;
        }
        Ok(())
    }
}

/// Exhaustive and greedy sequential search on the configured instance.
pub fn run_oracle(cfg: &RunConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let env = WptEnv::new(cfg.effective_env())?;
    let duration = cfg.env.transfer_duration;
    let exhaustive = exhaustive_search(env.links(), duration, cfg.env.e_min, cfg.enum_cap)?;
    let greedy = greedy_sequential_search(env.links(), duration, cfg.env.e_min);
    Ok(OracleReport {
        tx_count: env.tx_count(),
        code_count: env.code_count(),
        rx_count: env.rx_count(),
        e_min: cfg.env.e_min,
        exhaustive,
        greedy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn small(out: PathBuf) -> RunConfig {
        let mut cfg = RunConfig {
            episodes: 6,
            seed: 3,
            out,
            ..RunConfig::default()
        };
        cfg.env.tx_positions = vec![(0.0, 0.0), (30.0, 0.0)];
        cfg.env.codebook_size = 4;
        cfg.env.rx_count = 3;
        cfg.env.max_steps = 8;
        cfg.learner.hidden = 8;
        cfg
    }

    #[test]
    fn every_agent_writes_its_files() {
        let dir = tempfile::tempdir().unwrap();
        for kind in AgentKind::ALL {
            let mut cfg = small(dir.path().join(kind.name()));
            cfg.agent = kind;
            let report = run_training(&cfg).unwrap();
            let csv = fs::read_to_string(&report.metrics_path).unwrap();
            assert_eq!(csv.lines().count(), 7, "{kind}");
            assert!(report.checkpoint_path.exists());
            let saved = super::super::load_config(&cfg.out.join(CONFIG_FILE)).unwrap();
            assert_eq!(saved, cfg);
        }
    }

    #[test]
    fn oracle_report_lines() {
        let cfg = small(PathBuf::from("unused"));
        let r = run_oracle(&cfg).unwrap();
        assert_eq!(r.exhaustive.evaluations, 16);
        assert_eq!(r.greedy.evaluations, 8);
        let line = r.machine_line();
        assert!(!line.contains('\n'));
        assert!(line.contains("exhaustive_evaluations=16"));
        assert!(line.contains("greedy_evaluations=8"));
        assert!(r.to_string().contains("exhaustive"));
    }

    #[test]
    fn single_transmitter_methods_agree() {
        let mut cfg = small(PathBuf::from("unused"));
        cfg.env.tx_positions.truncate(1);
        let r = run_oracle(&cfg).unwrap();
        assert_eq!(r.exhaustive.codes, r.greedy.codes);
    }

    #[test]
    fn cap_maps_to_resource_exit() {
        let cfg = RunConfig {
            enum_cap: 100,
            ..RunConfig::default()
        };
        let err = run_oracle(&cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::Resource {
                needed: 4096,
                cap: 100
            }
        ));
        assert_eq!(err.exit_code(), 4);
    }
}
