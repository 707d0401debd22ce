//! The energy beamforming environment.
//!
//! `L` transmitters each select one code from a shared codebook (expressed in
//! each transmitter's local frame). Receiver energies are the closed-form
//! expectation of the received power over the transfer interval; because the
//! transmit signals are independent, zero mean and unit variance, cross terms
//! between transmitters vanish and the energy is additive across transmitters.
//!
//! Two stepping protocols are supported. [`WptEnv::step_joint`] commits all `L`
//! codes at once. [`WptEnv::step_rollout`] lets agents act one at a time in
//! ascending index order through intermediate states; the `L`-th call commits
//! exactly what `step_joint` would.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{
    beam_power_gain, los_link_response, ArrayConfig, ComplexVector, Geometry, Point,
};
use crate::codebook::Codebook;
use crate::error::{Error, Result};

pub const REWARD_INCREASE: f64 = 100.0;
pub const PENALTY_DECREASE: f64 = 300.0;
pub const PENALTY_INFEASIBLE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub tx_positions: Vec<Point>,
    pub field_bounds: Point,
    pub rx_count: usize,
    /// Explicit receiver placement; when `None` receivers are scattered from `placement_seed`.
    pub rx_positions: Option<Vec<Point>>,
    pub array: ArrayConfig,
    /// Per-transmitter boresight. `None` orients each array so the field center is broadside.
    pub tx_boresights: Option<Vec<f64>>,
    pub codebook_size: usize,
    /// Codebook span `zeta`, radians.
    pub codebook_range: f64,
    /// Codebook center in the local frame, radians.
    pub codebook_center: f64,
    /// Power transfer duration P, seconds.
    pub transfer_duration: f64,
    pub e_min: f64,
    pub max_steps: usize,
    pub placement_seed: u64,
    pub resample_rx_per_episode: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            tx_positions: vec![(0.0, 0.0), (30.0, 0.0), (30.0, 30.0), (0.0, 30.0)],
            field_bounds: (30.0, 30.0),
            rx_count: 5,
            rx_positions: None,
            array: ArrayConfig::default(),
            tx_boresights: None,
            codebook_size: 8,
            codebook_range: FRAC_PI_2,
            codebook_center: FRAC_PI_2,
            transfer_duration: 0.5,
            e_min: 0.0,
            max_steps: 100,
            placement_seed: 0,
            resample_rx_per_episode: false,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.transfer_duration > 0.0 && self.transfer_duration.is_finite()) {
            return Err(Error::invalid("transfer duration must be positive"));
        }
        if !(self.e_min >= 0.0 && self.e_min.is_finite()) {
            return Err(Error::invalid("e_min must be non-negative"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        if self.tx_positions.is_empty() {
            return Err(Error::invalid("need at least one transmitter"));
        }
        if self.rx_positions.is_none() && self.rx_count == 0 {
            return Err(Error::invalid("need at least one receiver"));
        }
        if let Some(b) = &self.tx_boresights {
            if b.len() != self.tx_positions.len() {
                return Err(Error::invalid(format!(
                    "{} boresights for {} transmitters",
                    b.len(),
                    self.tx_positions.len()
                )));
            }
        }
        self.array.validate()
    }
}

/// Precomputed per-(receiver, transmitter, code) power gains.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    rx_count: usize,
    tx_count: usize,
    code_count: usize,
    gains: Vec<f64>,
    rows: Vec<ComplexVector>,
}

impl LinkTable {
    pub fn build(geo: &Geometry, arrays: &[ArrayConfig], book: &Codebook) -> Result<Self> {
        let (k, l, n) = (geo.rx_count(), geo.tx_count(), book.len());
        if arrays.len() != l {
            return Err(Error::invalid("one array config per transmitter required"));
        }
        let mut rows = Vec::with_capacity(k * l);
        let mut gains = Vec::with_capacity(k * l * n);
        for j in 0..k {
            for (p, cfg) in arrays.iter().enumerate() {
                let row = los_link_response(p, j, geo, cfg)?;
                for code in book.codes() {
                    gains.push(beam_power_gain(&row, code)?);
                }
                rows.push(row);
            }
        }
        Ok(Self {
            rx_count: k,
            tx_count: l,
            code_count: n,
            gains,
            rows,
        })
    }

    /// Table from explicit gains laid out `[j][p][i]`; carries no complex rows.
    pub fn from_gains(
        rx_count: usize,
        tx_count: usize,
        code_count: usize,
        gains: Vec<f64>,
    ) -> Result<Self> {
        if rx_count == 0 || tx_count == 0 || code_count == 0 {
            return Err(Error::invalid("link table dimensions must be positive"));
        }
        if gains.len() != rx_count * tx_count * code_count {
            return Err(Error::invalid(format!(
                "expected {} gains, got {}",
                rx_count * tx_count * code_count,
                gains.len()
            )));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::invalid("gains must be finite and non-negative"));
        }
        Ok(Self {
            rx_count,
            tx_count,
            code_count,
            gains,
            rows: Vec::new(),
        })
    }

    pub fn rx_count(&self) -> usize {
        self.rx_count
    }

    pub fn tx_count(&self) -> usize {
        self.tx_count
    }

    pub fn code_count(&self) -> usize {
        self.code_count
    }

    #[inline]
    pub fn gain(&self, j: usize, p: usize, i: usize) -> f64 {
        self.gains[(j * self.tx_count + p) * self.code_count + i]
    }

    /// Complex link row `alpha_{j,p} conj(a(phi_{j,p}))`, if the table was built from geometry.
    pub fn row(&self, j: usize, p: usize) -> Option<&ComplexVector> {
        self.rows.get(j * self.tx_count + p)
    }

    /// Copy of the table with receivers reordered: new receiver `j` is old `perm[j]`.
    pub fn permute_receivers(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rx_count];
        if perm.len() != self.rx_count
            || perm
                .iter()
                .any(|&j| j >= self.rx_count || std::mem::replace(&mut seen[j], true))
        {
            return Err(Error::invalid("not a permutation of receivers"));
        }
        let block = self.tx_count * self.code_count;
        let gains = perm
            .iter()
            .flat_map(|&j| self.gains[j * block..(j + 1) * block].iter().copied())
            .collect();
        let rows = if self.rows.is_empty() {
            Vec::new()
        } else {
            perm.iter()
                .flat_map(|&j| {
                    self.rows[j * self.tx_count..(j + 1) * self.tx_count]
                        .iter()
                        .cloned()
                })
                .collect()
        };
        Ok(Self {
            rx_count: self.rx_count,
            tx_count: self.tx_count,
            code_count: self.code_count,
            gains,
            rows,
        })
    }
}

/// Expected energy `P * sum_p g[j][p][c_p]` delivered to receiver `j`.
pub fn expected_energy(
    j: usize,
    codes: &[Option<usize>],
    links: &LinkTable,
    duration: f64,
) -> Result<f64> {
    if j >= links.rx_count() {
        return Err(Error::Index {
            index: j,
            len: links.rx_count(),
        });
    }
    if codes.len() != links.tx_count() {
        return Err(Error::invalid(format!(
            "{} codes for {} transmitters",
            codes.len(),
            links.tx_count()
        )));
    }
    let mut sum = 0.0;
    for (p, c) in codes.iter().enumerate() {
        let c =
            c.ok_or_else(|| Error::InvalidState(format!("transmitter {p} has no code assigned")))?;
        if c >= links.code_count() {
            return Err(Error::Index {
                index: c,
                len: links.code_count(),
            });
        }
        sum += links.gain(j, p, c);
    }
    Ok(duration * sum)
}

fn energies_unchecked(codes: &[usize], links: &LinkTable, duration: f64) -> Vec<f64> {
    (0..links.rx_count())
        .map(|j| {
            let s: f64 = codes
                .iter()
                .enumerate()
                .map(|(p, &c)| links.gain(j, p, c))
                .sum();
            duration * s
        })
        .collect()
}

/// Transmit signal model for [`sample_energy_monte_carlo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalModel {
    /// i.i.d. circularly-symmetric complex normal samples with unit variance.
    ComplexGaussian,
    /// `x_p(t) = 1` for every transmitter and sample.
    Constant,
}

/// Sampled estimate of the received energy over `duration`.
///
/// `rows[p]` is the link row from transmitter `p` and `codes[p]` its code. The
/// interval is split into `n_samples` slots, each carrying one sample per transmitter.
pub fn sample_energy_monte_carlo(
    rows: &[&ComplexVector],
    codes: &[&ComplexVector],
    duration: f64,
    n_samples: usize,
    signal: SignalModel,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    if rows.len() != codes.len() || rows.is_empty() {
        return Err(Error::invalid("need one code per link row"));
    }
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::invalid("duration must be positive"));
    }
    let coupling: Vec<Complex64> = rows
        .iter()
        .zip(codes)
        .map(|(r, c)| r.dot(c))
        .collect::<Result<_>>()?;
    let acc = match signal {
        SignalModel::Constant => coupling.iter().sum::<Complex64>().norm_sqr() * n_samples as f64,
        SignalModel::ComplexGaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            let mut acc = 0.0;
            for _ in 0..n_samples {
                let mut y = Complex64::new(0.0, 0.0);
                for h in &coupling {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    y += h * Complex64::new(re * scale, im * scale);
                }
                acc += y.norm_sqr();
            }
            acc
        }
    };
    Ok(duration * acc / n_samples as f64)
}

/// Reward points for moving from `prev_total` to `new_total`.
pub fn reward(prev_total: f64, new_total: f64, energies: &[f64], e_min: f64) -> f64 {
    let mut r = 0.0;
    if new_total > prev_total {
        r += REWARD_INCREASE;
    } else if new_total < prev_total {
        r -= PENALTY_DECREASE;
    }
    let short = energies.iter().filter(|&&e| e < e_min).count();
    r - PENALTY_INFEASIBLE * short as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    /// Per-receiver energy of the last evaluated assignment (provisional in intermediate states).
    pub energies: Vec<f64>,
    /// Committed code per transmitter; `None` until the first full step.
    pub codes: Vec<Option<usize>>,
    pub step_count: usize,
    /// `(agent, action)` pairs already chosen in the current full step.
    pub partial: Vec<(usize, usize)>,
    /// Total energy of the last committed assignment.
    pub prev_total: f64,
}

impl EnvState {
    pub fn is_intermediate(&self) -> bool {
        !self.partial.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }

    pub fn committed_codes(&self) -> Option<Vec<usize>> {
        self.codes.iter().copied().collect()
    }

    /// `[e_1..e_K, c_1..c_L]` with unset codes as `-1` and partial actions overlaid.
    pub fn observation(&self) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.energies.len() + self.codes.len());
        obs.extend_from_slice(&self.energies);
        let base = obs.len();
        obs.extend(self.codes.iter().map(|c| c.map_or(-1.0, |c| c as f64)));
        for &(agent, action) in &self.partial {
            obs[base + agent] = action as f64;
        }
        obs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: EnvState,
    pub reward: f64,
    pub done: bool,
}

/// A placed network instance: geometry, codebook and gain table are fixed; states are passed by value.
#[derive(Debug, Clone)]
pub struct WptEnv {
    cfg: EnvConfig,
    geometry: Geometry,
    arrays: Vec<ArrayConfig>,
    codebook: Codebook,
    links: LinkTable,
    default_codes: Vec<usize>,
}

impl WptEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        let seed = cfg.placement_seed;
        Self::with_placement_seed(cfg, seed)
    }

    pub fn with_placement_seed(mut cfg: EnvConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        cfg.placement_seed = seed;
        let geometry = match &cfg.rx_positions {
            Some(rx) => Geometry::new(cfg.tx_positions.clone(), rx.clone(), cfg.field_bounds)?,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Geometry::scatter(
                    cfg.tx_positions.clone(),
                    cfg.field_bounds,
                    cfg.rx_count,
                    &mut rng,
                )?
            }
        };
        let arrays: Vec<ArrayConfig> = (0..geometry.tx_count())
            .map(|p| {
                let boresight = match &cfg.tx_boresights {
                    Some(b) => b[p],
                    None => geometry.bearing_to_center(p) - FRAC_PI_2,
                };
                cfg.array.with_boresight(boresight)
            })
            .collect();
        let codebook = Codebook::build(
            cfg.codebook_size,
            cfg.codebook_range,
            cfg.codebook_center,
            &cfg.array,
        )?;
        let links = LinkTable::build(&geometry, &arrays, &codebook)?;
        let default_codes = arrays
            .iter()
            .enumerate()
            .map(|(p, a)| {
                let local = (geometry.bearing_to_center(p) - a.boresight).rem_euclid(TAU);
                let local = if local > PI + codebook.center() {
                    local - TAU
                } else {
                    local
                };
                codebook.nearest_angle(local)
            })
            .collect();
        Ok(Self {
            cfg,
            geometry,
            arrays,
            codebook,
            links,
            default_codes,
        })
    }

    /// Same configuration with receivers re-scattered from `seed`.
    pub fn reseeded(&self, seed: u64) -> Result<Self> {
        Self::with_placement_seed(self.cfg.clone(), seed)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn arrays(&self) -> &[ArrayConfig] {
        &self.arrays
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn links(&self) -> &LinkTable {
        &self.links
    }

    pub fn tx_count(&self) -> usize {
        self.links.tx_count()
    }

    pub fn rx_count(&self) -> usize {
        self.links.rx_count()
    }

    pub fn code_count(&self) -> usize {
        self.links.code_count()
    }

    pub fn observation_len(&self) -> usize {
        self.rx_count() + self.tx_count()
    }

    /// Codes nearest the field center, used for agents that have not acted yet.
    pub fn default_codes(&self) -> &[usize] {
        &self.default_codes
    }

    /// Fresh episode: no stored energy, no codes.
    pub fn reset(&self) -> EnvState {
        EnvState {
            energies: vec![0.0; self.rx_count()],
            codes: vec![None; self.tx_count()],
            step_count: 0,
            partial: Vec::new(),
            prev_total: 0.0,
        }
    }

    pub fn energies(&self, codes: &[usize]) -> Result<Vec<f64>> {
        self.check_action(codes)?;
        Ok(energies_unchecked(
            codes,
            &self.links,
            self.cfg.transfer_duration,
        ))
    }

    pub fn total_energy(&self, codes: &[usize]) -> Result<f64> {
        Ok(self.energies(codes)?.iter().sum())
    }

    pub fn feasible_count(&self, energies: &[f64]) -> usize {
        energies.iter().filter(|&&e| e >= self.cfg.e_min).count()
    }

    /// Sampled energy at receiver `j` under `codes`; see [`sample_energy_monte_carlo`].
    pub fn sample_energy(
        &self,
        j: usize,
        codes: &[usize],
        n_samples: usize,
        signal: SignalModel,
        seed: u64,
    ) -> Result<f64> {
        self.check_action(codes)?;
        let rows = (0..self.tx_count())
            .map(|p| {
                self.links.row(j, p).ok_or(Error::Index {
                    index: j,
                    len: self.rx_count(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let code_vecs = codes
            .iter()
            .map(|&c| self.codebook.code(c))
            .collect::<Result<Vec<_>>>()?;
        sample_energy_monte_carlo(
            &rows,
            &code_vecs,
            self.cfg.transfer_duration,
            n_samples,
            signal,
            seed,
        )
    }

    fn check_action(&self, codes: &[usize]) -> Result<()> {
        if codes.len() != self.tx_count() {
            return Err(Error::invalid(format!(
                "{} codes for {} transmitters",
                codes.len(),
                self.tx_count()
            )));
        }
        if let Some(&c) = codes.iter().find(|&&c| c >= self.code_count()) {
            return Err(Error::Index {
                index: c,
                len: self.code_count(),
            });
        }
        Ok(())
    }

    fn check_running(&self, state: &EnvState) -> Result<()> {
        if state.step_count >= self.cfg.max_steps {
            return Err(Error::Protocol(format!(
                "episode finished after {} steps",
                state.step_count
            )));
        }
        Ok(())
    }

    fn commit(&self, state: &EnvState, action: &[usize]) -> StepResult {
        let energies = energies_unchecked(action, &self.links, self.cfg.transfer_duration);
        let total: f64 = energies.iter().sum();
        let r = reward(state.prev_total, total, &energies, self.cfg.e_min);
        let step_count = state.step_count + 1;
        StepResult {
            next: EnvState {
                energies,
                codes: action.iter().map(|&c| Some(c)).collect(),
                step_count,
                partial: Vec::new(),
                prev_total: total,
            },
            reward: r,
            done: step_count == self.cfg.max_steps,
        }
    }

    /// All transmitters switch codes at once.
    pub fn step_joint(&self, state: &EnvState, action: &[usize]) -> Result<StepResult> {
        if state.is_intermediate() {
            return Err(Error::Protocol(
                "joint step from an intermediate rollout state".into(),
            ));
        }
        self.check_running(state)?;
        self.check_action(action)?;
        Ok(self.commit(state, action))
    }

    /// Agent `agent` (0-based, ascending order) picks `action`.
    ///
    /// Before the last agent, the reward is scored on provisional energies where
    /// agents that have not acted keep their committed codes (or the field-center
    /// default on the first step). The last agent commits the full assignment.
    pub fn step_rollout(
        &self,
        state: &EnvState,
        agent: usize,
        action: usize,
    ) -> Result<StepResult> {
        self.check_running(state)?;
        if agent != state.partial.len() {
            return Err(Error::Protocol(format!(
                "agent {agent} acted out of order; expected agent {}",
                state.partial.len()
            )));
        }
        if action >= self.code_count() {
            return Err(Error::Index {
                index: action,
                len: self.code_count(),
            });
        }
        let mut partial = state.partial.clone();
        partial.push((agent, action));
        if partial.len() == self.tx_count() {
            let joint: Vec<usize> = partial.iter().map(|&(_, a)| a).collect();
            return Ok(self.commit(state, &joint));
        }
        let provisional: Vec<usize> = (0..self.tx_count())
            .map(|p| match partial.get(p) {
                Some(&(_, a)) => a,
                None => state.codes[p].unwrap_or(self.default_codes[p]),
            })
            .collect();
        let energies = energies_unchecked(&provisional, &self.links, self.cfg.transfer_duration);
        let total: f64 = energies.iter().sum();
        let r = reward(state.prev_total, total, &energies, self.cfg.e_min);
        Ok(StepResult {
            next: EnvState {
                energies,
                codes: state.codes.clone(),
                step_count: state.step_count,
                partial,
                prev_total: state.prev_total,
            },
            reward: r,
            done: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::steering_vector;

    fn small_cfg() -> EnvConfig {
        EnvConfig {
            rx_count: 3,
            codebook_size: 4,
            tx_positions: vec![(0.0, 0.0), (30.0, 0.0)],
            placement_seed: 7,
            ..EnvConfig::default()
        }
    }

    #[test]
    fn single_matched_link_energy() {
        // alpha = 1, matched code, M = 4, P = 0.5
        let cfg = ArrayConfig::new(4, PI, 8e6, 0.0).unwrap();
        let code = steering_vector(1.0, &cfg).unwrap();
        let g = beam_power_gain(&code.conj(), &code).unwrap();
        let links = LinkTable::from_gains(1, 1, 1, vec![g]).unwrap();
        let e = expected_energy(0, &[Some(0)], &links, 0.5).unwrap();
        assert!((e - 8.0).abs() < 1e-12);
    }

    #[test]
    fn energy_sums_transmitters() {
        let links = LinkTable::from_gains(1, 2, 2, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        let e = expected_energy(0, &[Some(1), Some(0)], &links, 0.5).unwrap();
        assert_eq!(e, 0.5 * (2.0 + 3.0));
        assert!(matches!(
            expected_energy(0, &[Some(1), None], &links, 0.5),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn constant_signal_is_exact() {
        let env = WptEnv::new(EnvConfig {
            tx_positions: vec![(0.0, 0.0)],
            ..small_cfg()
        })
        .unwrap();
        let e = env
            .sample_energy(1, &[2], 17, SignalModel::Constant, 0)
            .unwrap();
        let want = 0.5 * env.links().gain(1, 0, 2);
        assert!((e - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn reward_branches() {
        let ok = [5.0, 5.0, 5.0];
        let two_short = [0.5, 0.5, 5.0];
        assert_eq!(reward(1.0, 2.0, &ok, 1.0), 100.0);
        assert_eq!(reward(1.0, 1.0, &ok, 1.0), 0.0);
        assert_eq!(reward(2.0, 1.0, &ok, 1.0), -300.0);
        assert_eq!(reward(1.0, 2.0, &two_short, 1.0), 0.0);
        assert_eq!(reward(1.0, 1.0, &two_short, 1.0), -100.0);
        assert_eq!(reward(2.0, 1.0, &two_short, 1.0), -400.0);
    }

    #[test]
    fn reset_state() {
        let env = WptEnv::new(small_cfg()).unwrap();
        let s = env.reset();
        assert_eq!(s.total(), 0.0);
        assert_eq!(s.step_count, 0);
        assert_eq!(s.observation(), vec![0.0, 0.0, 0.0, -1.0, -1.0]);
        for &(x, y) in &env.geometry().rx_positions {
            assert!((1.0..=29.0).contains(&x) && (1.0..=29.0).contains(&y));
        }
        let again = WptEnv::new(small_cfg()).unwrap();
        assert_eq!(env.geometry(), again.geometry());
        let other = env.reseeded(8).unwrap();
        assert_ne!(env.geometry(), other.geometry());
    }

    #[test]
    fn four_corner_observation_at_reset() {
        let env = WptEnv::new(EnvConfig {
            rx_count: 2,
            ..EnvConfig::default()
        })
        .unwrap();
        assert_eq!(
            env.reset().observation(),
            vec![0.0, 0.0, -1.0, -1.0, -1.0, -1.0]
        );
        let s = env.step_joint(&env.reset(), &[3, 1, 2, 0]).unwrap().next;
        let obs = s.observation();
        assert_eq!(obs.len(), 6);
        assert_eq!(&obs[2..], &[3.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn default_codes_face_center() {
        let env = WptEnv::new(EnvConfig::default()).unwrap();
        // 8 codes over [pi/4, 3pi/4]; broadside pi/2 falls between codes 3 and 4
        for &c in env.default_codes() {
            assert!(c == 3 || c == 4);
        }
    }

    #[test]
    fn joint_step_protocol() {
        let env = WptEnv::new(EnvConfig {
            max_steps: 3,
            ..small_cfg()
        })
        .unwrap();
        let mut s = env.reset();
        let r = env.step_joint(&s, &[1, 2]).unwrap();
        assert_eq!(r.reward, 100.0);
        s = r.next;
        let r = env.step_joint(&s, &[1, 2]).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(!r.done);
        let r = env.step_joint(&r.next, &[0, 0]).unwrap();
        assert!(r.done);
        assert_eq!(r.next.step_count, 3);
        assert!(matches!(
            env.step_joint(&r.next, &[0, 0]),
            Err(Error::Protocol(_))
        ));
        assert!(matches!(
            env.step_rollout(&r.next, 0, 0),
            Err(Error::Protocol(_))
        ));
        assert!(env.step_joint(&env.reset(), &[0]).is_err());
        assert!(env.step_joint(&env.reset(), &[0, 4]).is_err());
    }

    #[test]
    fn rollout_protocol() {
        let env = WptEnv::new(EnvConfig {
            tx_positions: EnvConfig::default().tx_positions,
            ..small_cfg()
        })
        .unwrap();
        let s = env.reset();
        assert!(matches!(
            env.step_rollout(&s, 1, 0),
            Err(Error::Protocol(_))
        ));
        let r = env.step_rollout(&s, 0, 2).unwrap();
        assert_eq!(r.next.partial.len(), 1);
        assert!(!r.done);
        assert_eq!(r.next.observation()[3..], [2.0, -1.0, -1.0, -1.0]);
        assert!(matches!(
            env.step_joint(&r.next, &[0, 0, 0, 0]),
            Err(Error::Protocol(_))
        ));
        // provisional energies use the center defaults for agents 1..3
        let mut prov = env.default_codes().to_vec();
        prov[0] = 2;
        assert_eq!(r.next.energies, env.energies(&prov).unwrap());
    }

    #[test]
    fn last_rollout_reward_equals_joint_reward() {
        let env = WptEnv::new(EnvConfig {
            tx_positions: EnvConfig::default().tx_positions,
            e_min: 30.0,
            ..small_cfg()
        })
        .unwrap();
        let base = env.step_joint(&env.reset(), &[0, 1, 2, 3]).unwrap().next;
        let action = [3, 2, 1, 0];
        let joint = env.step_joint(&base, &action).unwrap();
        let mut s = base;
        let mut last = None;
        for (k, &a) in action.iter().enumerate() {
            let r = env.step_rollout(&s, k, a).unwrap();
            s = r.next.clone();
            last = Some(r);
        }
        assert_eq!(last.unwrap(), joint);
    }

    #[test]
    fn single_receiver_matched_beams_are_best() {
        let env = WptEnv::new(EnvConfig {
            rx_count: 1,
            codebook_size: 5,
            tx_positions: vec![(0.0, 0.0), (30.0, 0.0), (30.0, 30.0)],
            ..small_cfg()
        })
        .unwrap();
        let links = env.links();
        let matched: Vec<usize> = (0..3)
            .map(|p| {
                (0..5)
                    .max_by(|&a, &b| links.gain(0, p, a).total_cmp(&links.gain(0, p, b)))
                    .unwrap()
            })
            .collect();
        let best = env.total_energy(&matched).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    assert!(env.total_energy(&[a, b, c]).unwrap() <= best);
                }
            }
        }
    }

    #[test]
    fn changing_one_code_only_moves_its_terms() {
        let env = WptEnv::new(EnvConfig {
            tx_positions: EnvConfig::default().tx_positions,
            ..small_cfg()
        })
        .unwrap();
        let a = env.energies(&[0, 1, 2, 3]).unwrap();
        let b = env.energies(&[0, 1, 0, 3]).unwrap();
        let l = env.links();
        for j in 0..env.rx_count() {
            let delta = 0.5 * (l.gain(j, 2, 0) - l.gain(j, 2, 2));
            assert!((b[j] - a[j] - delta).abs() < 1e-9 * (1.0 + a[j]));
        }
    }

    #[test]
    fn receiver_permutation() {
        let links = LinkTable::from_gains(2, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = links.permute_receivers(&[1, 0]).unwrap();
        assert_eq!(p.gain(0, 0, 1), 4.0);
        assert_eq!(p.gain(1, 0, 0), 1.0);
        assert!(links.permute_receivers(&[0, 0]).is_err());
    }
}
