//! RMPPI: a warm-up of straight pushes fills the history, then every step samples action
//! sequences around the previous optimum, rolls them out through the recurrent model and
//! executes the first action of the path-integral average.

mod dump;
mod history;
mod mppi;

pub use dump::{write_rollout_dump, RolloutRecord};
pub use history::HistoryBuffer;
pub use mppi::{forward_sequence, mppi_update, mppi_weights, rollout_costs, sample_perturbations, sample_rollouts, ActionSequence};

use ndarray::{Array2, Array3};
use rand::RngCore;

use crate::dataset::{Episode, EpisodeStep, Terminal};
use crate::error::{Error, Result};
use crate::eval::{success, FinalError, ThresholdTier};
use crate::model::{forward_batch, Mode, ModelWeights};
use crate::sim::{observe_state_tuple, Pose2D, PushAction, PushEnv, Vec2, DEFAULT_PUSH_MAGNITUDE};
use crate::Scalar;

/// Batched next-motion predictor used by the rollouts.
pub trait Dynamics: Sync {
    type Scalar: Scalar;
    /// `windows` is `steps x batch x 7` raw tuples; returns `batch x 3` object-frame motions.
    fn predict_batch(&self, windows: &Array3<Self::Scalar>) -> Result<Array2<Self::Scalar>>;
}

impl<S: Scalar> Dynamics for ModelWeights<S> {
    type Scalar = S;

    fn predict_batch(&self, windows: &Array3<S>) -> Result<Array2<S>> {
        let mut no_rng = rand::rngs::mock::StepRng::new(0, 0);
        Ok(forward_batch(self, windows, Mode::Eval, &mut no_rng)?.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmppiConfig {
    /// Number of sampled sequences `N`.
    pub samples: usize,
    /// Rollout horizon `T`.
    pub horizon: usize,
    /// History parameter `K`; the model sees `K + 1` tuples.
    pub history_k: usize,
    pub lambda: f64,
    /// Standard deviation of the perturbation added to the unit push direction.
    pub noise_sigma: f64,
    pub push_magnitude: f64,
    pub max_steps: usize,
    /// Episode stops once the object is inside this tier.
    pub goal_tier: ThresholdTier,
    /// Warm-up pushes; `None` pushes straight toward the goal `K + 1` times.
    pub initial_controls: Option<Vec<PushAction<f64>>>,
}

impl Default for RmppiConfig {
    fn default() -> Self {
        Self {
            samples: 1024,
            horizon: 5,
            history_k: 4,
            lambda: 0.002,
            noise_sigma: 0.4,
            push_magnitude: DEFAULT_PUSH_MAGNITUDE,
            max_steps: 60,
            goal_tier: ThresholdTier::Mid,
            initial_controls: None,
        }
    }
}

impl RmppiConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.samples == 0 || self.horizon == 0 || self.history_k == 0 {
            return bad("samples, horizon and history_k must be at least 1");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) || !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return bad("lambda and noise_sigma must be positive");
        }
        if !(self.push_magnitude > 0.0 && self.push_magnitude.is_finite()) {
            return bad("push_magnitude must be positive");
        }
        if let Some(c) = &self.initial_controls {
            if c.len() != self.history_k + 1 {
                return Err(Error::Config(format!("{} initial controls given, K + 1 = {} required", c.len(), self.history_k + 1)));
            }
        }
        Ok(())
    }
}

/// Goal pose and the per-axis weights of the rollout cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSpec {
    pub target: Pose2D<f64>,
    /// `(w_x, w_y, w_theta)`, applied to errors in the goal frame.
    pub weights: (f64, f64, f64),
}

impl GoalSpec {
    pub const DEFAULT_WEIGHTS: (f64, f64, f64) = (1.0, 3.0, 0.5);

    pub fn new(target: Pose2D<f64>) -> Self {
        Self { target, weights: Self::DEFAULT_WEIGHTS }
    }

    /// Weighted L1 distance of `pose` from the target.
    pub fn cost(&self, pose: &Pose2D<f64>) -> f64 {
        let e = FinalError::between(pose, &self.target);
        self.weights.0 * e.e_x + self.weights.1 * e.e_y + self.weights.2 * e.e_theta
    }
}

/// Straight push from the object center toward the goal, in the object frame.
fn toward_goal(object: &Pose2D<f64>, goal: &Pose2D<f64>, magnitude: f64) -> PushAction<f64> {
    let dir = object.to_local(goal.position());
    PushAction::new(dir, magnitude).unwrap_or_else(|| PushAction::forward(magnitude))
}

fn at_goal(env: &PushEnv<f64>, tier: ThresholdTier) -> bool {
    success(&FinalError::between(&env.state().object, &env.goal), tier)
}

/// Live episode state shared by warm-up and the control loop.
struct Recorder {
    start: Pose2D<f64>,
    prev: crate::sim::WorldState<f64>,
    steps: Vec<EpisodeStep<f64>>,
}

impl Recorder {
    fn new(env: &PushEnv<f64>) -> Self {
        Self { start: env.state().object, prev: *env.state(), steps: Vec::new() }
    }

    /// Records the observation into `buffer`, executes `action` and logs the step.
    fn execute(&mut self, env: &mut PushEnv<f64>, buffer: &mut HistoryBuffer<f64>, action: PushAction<f64>) -> Result<()> {
        let curr = *env.state();
        let tuple = observe_state_tuple(&self.prev, &curr, &action);
        buffer.observe(tuple);
        buffer.commit(tuple.ax, tuple.ay)?;
        self.steps.push(EpisodeStep { state: curr, action, tuple });
        env.apply(Some(&action));
        self.prev = curr;
        Ok(())
    }

    /// Pending observation of the current state for the next decision.
    fn observe(&self, env: &PushEnv<f64>, buffer: &mut HistoryBuffer<f64>) {
        let hold = PushAction { direction: Vec2::new(1.0, 0.0), magnitude: 0.0 };
        buffer.observe(observe_state_tuple(&self.prev, env.state(), &hold));
    }

    fn finish(self, env: &PushEnv<f64>, tier: ThresholdTier) -> Episode<f64> {
        let terminal = if at_goal(env, tier) { Terminal::GoalReached } else { Terminal::StepLimit };
        Episode { params: env.params, start: self.start, goal: env.goal, steps: self.steps, final_state: *env.state(), terminal }
    }
}

/// Executes the `K + 1` warm-up pushes and returns the filled buffer.
pub fn warm_up(env: &mut PushEnv<f64>, config: &RmppiConfig) -> Result<HistoryBuffer<f64>> {
    let mut rec = Recorder::new(env);
    warm_up_recorded(env, config, &mut rec)
}

fn warm_up_recorded(env: &mut PushEnv<f64>, config: &RmppiConfig, rec: &mut Recorder) -> Result<HistoryBuffer<f64>> {
    config.validate()?;
    let k = config.history_k;
    let mut buffer = HistoryBuffer::new(k + 1);
    for i in 0..=k {
        let action = match &config.initial_controls {
            Some(c) => c[i],
            None => toward_goal(&env.state().object, &env.goal, config.push_magnitude),
        };
        rec.execute(env, &mut buffer, action)?;
    }
    Ok(buffer)
}

/// Runs one RMPPI episode. `dump`, when given, receives every control step's samples.
pub fn control_episode<D: Dynamics + ?Sized>(
    mut env: PushEnv<f64>,
    model: &D,
    goal: &GoalSpec,
    config: &RmppiConfig,
    rng: &mut dyn RngCore,
    mut dump: Option<&mut Vec<RolloutRecord>>,
) -> Result<Episode<f64>> {
    config.validate()?;
    let mut rec = Recorder::new(&env);
    if at_goal(&env, config.goal_tier) {
        return Ok(rec.finish(&env, config.goal_tier));
    }
    let mut buffer = warm_up_recorded(&mut env, config, &mut rec)?;
    let mut nominal = forward_sequence(config.horizon, config.push_magnitude);
    while rec.steps.len() < config.max_steps && !at_goal(&env, config.goal_tier) {
        rec.observe(&env, &mut buffer);
        let sequences = sample_rollouts(&nominal, config, rng);
        let current = env.state().object;
        let costs = rollout_costs(model, &buffer, &current, &sequences, goal, config.history_k)?;
        let optimal = mppi_update(&costs, &sequences, config)?;
        if let Some(d) = dump.as_deref_mut() {
            d.push(RolloutRecord { step: rec.steps.len(), sequences, costs, optimal: optimal.clone() });
        }
        let first = optimal[0];
        let action = PushAction::new(first, first.norm()).unwrap_or_else(|| PushAction::forward(config.push_magnitude));
        rec.execute(&mut env, &mut buffer, action)?;
        nominal = optimal[1..].to_vec();
        nominal.push(*optimal.last().unwrap());
    }
    Ok(rec.finish(&env, config.goal_tier))
}
