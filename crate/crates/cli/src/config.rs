//! Run configuration: a TOML file whose every key has a default.
//!
//! ```toml
//! seed = 0
//!
//! [sim]
//! workspace_min = [0.0, 0.0]
//! workspace_max = [1.0, 1.0]
//! contact_tolerance = 1e-6
//! contact_friction = 0.3
//! max_step = 0.01
//! max_substep = 0.0005
//! max_pusher_force = 6.0
//!
//! [dataset]
//! objects = 300
//! episodes_per_object = 20
//! max_steps = 60
//! goal_tier = "mid"            # tight | mid | loose
//! min_goal_distance = 0.15
//! pusher_jitter = 0.3
//! generator = "scripted"       # scripted | policy (needs --agent)
//! size = [0.08, 0.25]          # parameter ranges
//! mass = [0.01, 0.8]
//! mu_slide = [0.1, 1.0]
//! mu_rot = [0.001, 0.01]
//! damping = [0.01, 0.015]
//!
//! [model]
//! history_k = 4
//! precision = "f32"            # f32 | f64
//! hidden1 = 128
//! hidden2 = 64
//! dense = 64
//! learning_rate = 1e-3
//! ...                          # every TrainConfig field
//!
//! [control]                    # every RMPPI setting
//! [policy]                     # DDPG + HER settings
//! [eval]                       # benchmark and sweep settings
//! ```
//!
//! Unknown keys are rejected. The config hash is the SHA-256 of the canonical
//! re-serialization, truncated to 16 hex digits.

use std::path::Path;

use rmppi_core::control::RmppiConfig;
use rmppi_core::dataset::CollectConfig;
use rmppi_core::eval::{fixture, BenchmarkConfig, Fixture, TaskSpec, ThresholdTier};
use rmppi_core::model::{Architecture, TrainConfig};
use rmppi_core::policy::{AgentConfig, DdpgConfig, ScriptedGenerator};
use rmppi_core::seed::{derive_seed, stream};
use rmppi_core::sim::{ParamRanges, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub sim: SimSection,
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub control: ControlSection,
    pub policy: PolicySection,
    pub eval: EvalSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            sim: SimSection::default(),
            dataset: DatasetSection::default(),
            model: ModelSection::default(),
            control: ControlSection::default(),
            policy: PolicySection::default(),
            eval: EvalSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub workspace_min: [f64; 2],
    pub workspace_max: [f64; 2],
    pub contact_tolerance: f64,
    pub contact_friction: f64,
    pub max_step: f64,
    pub max_substep: f64,
    pub max_pusher_force: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            workspace_min: [s.workspace_min.0, s.workspace_min.1],
            workspace_max: [s.workspace_max.0, s.workspace_max.1],
            contact_tolerance: s.contact_tolerance,
            contact_friction: s.contact_friction,
            max_step: s.max_step,
            max_substep: s.max_substep,
            max_pusher_force: s.max_pusher_force,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub objects: usize,
    pub episodes_per_object: usize,
    pub max_steps: usize,
    pub goal_tier: String,
    pub min_goal_distance: f64,
    pub pusher_jitter: f64,
    pub generator: String,
    pub generator_noise: f64,
    pub size: [f64; 2],
    pub mass: [f64; 2],
    pub mu_slide: [f64; 2],
    pub mu_rot: [f64; 2],
    pub damping: [f64; 2],
}

impl Default for DatasetSection {
    fn default() -> Self {
        let c = CollectConfig::default();
        let r = ParamRanges::DEFAULT;
        Self {
            objects: 300,
            episodes_per_object: 20,
            max_steps: c.max_steps,
            goal_tier: c.goal_tier.name().into(),
            min_goal_distance: c.min_goal_distance,
            pusher_jitter: c.pusher_jitter,
            generator: "scripted".into(),
            generator_noise: ScriptedGenerator::default().noise_std,
            size: [r.size.0, r.size.1],
            mass: [r.mass.0, r.mass.1],
            mu_slide: [r.mu_slide.0, r.mu_slide.1],
            mu_rot: [r.mu_rot.0, r.mu_rot.1],
            damping: [r.damping.0, r.damping.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Windows of `history_k + 1` tuples; must equal `control.history_k`.
    pub history_k: usize,
    pub precision: String,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dense: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub dropout_rate: f64,
    pub batch_size: usize,
    pub max_steps: usize,
    pub validation_fraction: f64,
    pub validate_every: usize,
    /// Zero disables clipping.
    pub grad_clip: f64,
    pub final_lr_fraction: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            history_k: 4,
            precision: "f32".into(),
            hidden1: t.arch.hidden1,
            hidden2: t.arch.hidden2,
            dense: t.arch.dense,
            learning_rate: t.learning_rate,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
            dropout_rate: t.dropout_rate,
            batch_size: t.batch_size,
            max_steps: 10_000,
            validation_fraction: t.validation_fraction,
            validate_every: 500,
            grad_clip: t.grad_clip.unwrap_or(0.0),
            final_lr_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub samples: usize,
    pub horizon: usize,
    pub history_k: usize,
    pub lambda: f64,
    pub noise_sigma: f64,
    pub push_magnitude: f64,
    pub max_steps: usize,
    pub goal_tier: String,
}

impl Default for ControlSection {
    fn default() -> Self {
        let c = RmppiConfig::default();
        Self {
            samples: c.samples,
            horizon: c.horizon,
            history_k: c.history_k,
            lambda: c.lambda,
            noise_sigma: c.noise_sigma,
            push_magnitude: c.push_magnitude,
            max_steps: c.max_steps,
            goal_tier: c.goal_tier.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub precision: String,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub action_l2: f64,
    pub noise_std: f64,
    pub random_eps: f64,
    pub episodes: usize,
    pub updates_per_episode: usize,
    pub batch_size: usize,
    pub k_future: usize,
    pub replay_capacity: usize,
    pub max_steps: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        let a = AgentConfig::default();
        let d = DdpgConfig::default();
        Self {
            precision: "f32".into(),
            hidden: a.hidden,
            gamma: a.gamma,
            tau: a.tau,
            actor_lr: a.actor_lr,
            critic_lr: a.critic_lr,
            action_l2: a.action_l2,
            noise_std: a.noise_std,
            random_eps: a.random_eps,
            episodes: d.episodes,
            updates_per_episode: d.updates_per_episode,
            batch_size: d.batch_size,
            k_future: d.k_future,
            replay_capacity: d.replay_capacity,
            max_steps: d.max_steps,
            eval_every: d.eval_every,
            eval_episodes: d.eval_episodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Fixture names for `push` and `eval`.
    pub objects: Vec<String>,
    pub episodes_per_object: usize,
    pub tiers: Vec<String>,
    pub goal_distance: [f64; 2],
    pub max_turn: f64,
    pub margin: f64,
    pub sweep_k: Vec<usize>,
    pub sweep_t: Vec<usize>,
    /// Randomized objects used by `sweep`.
    pub sweep_objects: usize,
    pub sweep_episodes: usize,
    /// Start pose and arc of the `goals` command.
    pub goals_start: [f64; 3],
    pub goals_length: f64,
    pub goals_turn: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        let t = TaskSpec::default();
        Self {
            objects: ["A", "B", "C", "D", "E"].map(String::from).to_vec(),
            episodes_per_object: 20,
            tiers: ThresholdTier::ALL.iter().map(|t| t.name().to_string()).collect(),
            goal_distance: [t.distance.0, t.distance.1],
            max_turn: t.max_turn,
            margin: t.margin,
            sweep_k: vec![2, 3, 4, 5, 6],
            sweep_t: vec![5],
            sweep_objects: 50,
            sweep_episodes: 1,
            goals_start: [0.5, 0.3, std::f64::consts::FRAC_PI_2],
            goals_length: 0.15,
            goals_turn: 0.25,
        }
    }
}

fn tier(s: &str, key: &str) -> Result<ThresholdTier, CliError> {
    ThresholdTier::parse(s).ok_or_else(|| CliError::Config(format!("{key}: unknown tier {s:?} (tight, mid, loose)")))
}

fn pair(v: [f64; 2], key: &str) -> Result<(f64, f64), CliError> {
    if v[0].is_finite() && v[1].is_finite() && v[0] <= v[1] {
        Ok((v[0], v[1]))
    } else {
        Err(CliError::Config(format!("{key}: expected [low, high], got {v:?}")))
    }
}

/// Numeric precision of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

fn precision(s: &str, key: &str) -> Result<Precision, CliError> {
    match s {
        "f32" => Ok(Precision::F32),
        "f64" => Ok(Precision::F64),
        _ => Err(CliError::Config(format!("{key}: expected \"f32\" or \"f64\", got {s:?}"))),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every section by building the core configurations.
    pub fn validate(&self) -> Result<(), CliError> {
        let core = |e: rmppi_core::Error| CliError::Config(e.to_string());
        self.sim_config().validate().map_err(core)?;
        self.collect_config()?;
        let r = self.param_ranges()?;
        r.validate_ranges().map_err(|m| CliError::Config(format!("dataset ranges: {m}")))?;
        if !matches!(self.dataset.generator.as_str(), "scripted" | "policy") {
            return Err(CliError::Config(format!("dataset.generator: expected \"scripted\" or \"policy\", got {:?}", self.dataset.generator)));
        }
        if !(self.dataset.generator_noise >= 0.0) {
            return Err(CliError::Config("dataset.generator_noise must be non-negative".into()));
        }
        self.train_config().validate().map_err(core)?;
        precision(&self.model.precision, "model.precision")?;
        precision(&self.policy.precision, "policy.precision")?;
        if self.model.history_k == 0 {
            return Err(CliError::Config("model.history_k must be at least 1".into()));
        }
        if self.model.history_k != self.control.history_k {
            return Err(CliError::Config(format!(
                "model.history_k = {} but control.history_k = {}; the controller must feed windows of the trained length",
                self.model.history_k, self.control.history_k
            )));
        }
        self.rmppi_config()?.validate().map_err(core)?;
        self.ddpg_config(0)?.validate().map_err(core)?;
        self.fixtures()?;
        for t in &self.eval.tiers {
            tier(t, "eval.tiers")?;
        }
        let d = pair(self.eval.goal_distance, "eval.goal_distance")?;
        if !(d.0 > 0.0) || !(self.eval.max_turn >= 0.0) || !(self.eval.margin >= 0.0) {
            return Err(CliError::Config("eval task: goal_distance must be positive, max_turn and margin non-negative".into()));
        }
        if self.eval.sweep_k.iter().any(|&k| k == 0) || self.eval.sweep_t.iter().any(|&t| t == 0) {
            return Err(CliError::Config("eval.sweep_k and eval.sweep_t entries must be positive".into()));
        }
        if !(self.eval.goals_length > 0.0) {
            return Err(CliError::Config("eval.goals_length must be positive".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn component_seed(&self, stream: u32, index: u32) -> u64 {
        derive_seed(self.seed, stream, index)
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            workspace_min: (s.workspace_min[0], s.workspace_min[1]),
            workspace_max: (s.workspace_max[0], s.workspace_max[1]),
            contact_tolerance: s.contact_tolerance,
            contact_friction: s.contact_friction,
            max_step: s.max_step,
            max_substep: s.max_substep,
            max_pusher_force: s.max_pusher_force,
        }
    }

    pub fn param_ranges(&self) -> Result<ParamRanges, CliError> {
        let d = &self.dataset;
        Ok(ParamRanges {
            size: pair(d.size, "dataset.size")?,
            mass: pair(d.mass, "dataset.mass")?,
            mu_slide: pair(d.mu_slide, "dataset.mu_slide")?,
            mu_rot: pair(d.mu_rot, "dataset.mu_rot")?,
            damping: pair(d.damping, "dataset.damping")?,
        })
    }

    pub fn collect_config(&self) -> Result<CollectConfig, CliError> {
        let d = &self.dataset;
        if d.max_steps == 0 {
            return Err(CliError::Config("dataset.max_steps must be positive".into()));
        }
        if !(d.min_goal_distance >= 0.0) || !(0.0..=1.0).contains(&d.pusher_jitter) {
            return Err(CliError::Config("dataset.min_goal_distance must be non-negative and pusher_jitter in [0, 1]".into()));
        }
        Ok(CollectConfig { sim: self.sim_config(), max_steps: d.max_steps, goal_tier: tier(&d.goal_tier, "dataset.goal_tier")?, min_goal_distance: d.min_goal_distance, pusher_jitter: d.pusher_jitter })
    }

    pub fn model_precision(&self) -> Precision {
        precision(&self.model.precision, "model.precision").unwrap_or(Precision::F32)
    }

    pub fn policy_precision(&self) -> Precision {
        precision(&self.policy.precision, "policy.precision").unwrap_or(Precision::F32)
    }

    pub fn train_config(&self) -> TrainConfig {
        let m = &self.model;
        TrainConfig {
            arch: Architecture { hidden1: m.hidden1, hidden2: m.hidden2, dense: m.dense },
            learning_rate: m.learning_rate,
            adam_beta1: m.adam_beta1,
            adam_beta2: m.adam_beta2,
            adam_eps: m.adam_eps,
            dropout_rate: m.dropout_rate,
            batch_size: m.batch_size,
            max_steps: m.max_steps,
            seed: self.component_seed(stream::TRAIN_MODEL, 0),
            validation_fraction: m.validation_fraction,
            validate_every: m.validate_every,
            grad_clip: if m.grad_clip > 0.0 { Some(m.grad_clip) } else { None },
            final_lr_fraction: m.final_lr_fraction,
        }
    }

    pub fn rmppi_config(&self) -> Result<RmppiConfig, CliError> {
        let c = &self.control;
        Ok(RmppiConfig {
            samples: c.samples,
            horizon: c.horizon,
            history_k: c.history_k,
            lambda: c.lambda,
            noise_sigma: c.noise_sigma,
            push_magnitude: c.push_magnitude,
            max_steps: c.max_steps,
            goal_tier: tier(&c.goal_tier, "control.goal_tier")?,
            initial_controls: None,
        })
    }

    pub fn ddpg_config(&self, seed: u64) -> Result<DdpgConfig, CliError> {
        let p = &self.policy;
        let d = DdpgConfig::default();
        Ok(DdpgConfig {
            agent: AgentConfig {
                hidden: p.hidden.clone(),
                gamma: p.gamma,
                tau: p.tau,
                actor_lr: p.actor_lr,
                critic_lr: p.critic_lr,
                action_l2: p.action_l2,
                push_magnitude: self.control.push_magnitude,
                noise_std: p.noise_std,
                random_eps: p.random_eps,
                goal_tier: tier(&self.dataset.goal_tier, "dataset.goal_tier")?,
            },
            episodes: p.episodes,
            updates_per_episode: p.updates_per_episode,
            batch_size: p.batch_size,
            k_future: p.k_future,
            replay_capacity: p.replay_capacity,
            max_steps: p.max_steps,
            object: d.object,
            sim: self.sim_config(),
            task: self.task_spec(),
            eval_every: p.eval_every,
            eval_episodes: p.eval_episodes,
            seed,
        })
    }

    pub fn task_spec(&self) -> TaskSpec {
        let e = &self.eval;
        TaskSpec { distance: (e.goal_distance[0], e.goal_distance[1]), max_turn: e.max_turn, margin: e.margin }
    }

    pub fn fixtures(&self) -> Result<Vec<Fixture>, CliError> {
        if self.eval.objects.is_empty() {
            return Err(CliError::Config("eval.objects must not be empty".into()));
        }
        self.eval.objects.iter().map(|n| fixture(n).ok_or_else(|| CliError::Config(format!("eval.objects: unknown fixture {n:?} (A-E, P)")))).collect()
    }

    pub fn tiers(&self) -> Vec<ThresholdTier> {
        self.eval.tiers.iter().filter_map(|t| ThresholdTier::parse(t)).collect()
    }

    pub fn benchmark_config(&self, seed: u64, episodes_per_object: usize, jobs: usize) -> BenchmarkConfig {
        BenchmarkConfig { episodes_per_object, seed, jobs, sim: self.sim_config(), task: self.task_spec(), config_hash: self.hash() }
    }
}

/// Range checks for randomization bounds.
trait RangeCheck {
    fn validate_ranges(&self) -> Result<(), String>;
}

impl RangeCheck for ParamRanges {
    fn validate_ranges(&self) -> Result<(), String> {
        let positive = |(lo, _): (f64, f64)| lo > 0.0;
        if !(positive(self.size) && positive(self.mass) && positive(self.mu_slide) && self.mu_rot.0 >= 0.0 && self.damping.0 >= 0.0) {
            return Err("sizes, masses and sliding friction must be positive".into());
        }
        Ok(())
    }
}
