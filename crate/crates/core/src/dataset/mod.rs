//! Domain-randomized objects, episode collection and training windows.

pub mod format;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::eval::{success, FinalError, ThresholdTier};
use crate::policy::ActionSource;
use crate::sim::{observe_state_tuple, ObjectParams, ParamRanges, Pose2D, PushAction, PushEnv, SimConfig, Vec2, WorldState, OBJECT_HEIGHT};
use crate::Scalar;

/// Number of channels in a state tuple.
pub const TUPLE_DIM: usize = 7;
/// Number of predicted motion channels.
pub const MOTION_DIM: usize = 3;

/// Per-step encoding: object motion increments, pusher position and action, all in the
/// object frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateTuple<S> {
    pub dx: S,
    pub dy: S,
    pub dtheta: S,
    pub px: S,
    pub py: S,
    pub ax: S,
    pub ay: S,
}

impl<S: Scalar> StateTuple<S> {
    pub fn to_array(&self) -> [S; TUPLE_DIM] {
        [self.dx, self.dy, self.dtheta, self.px, self.py, self.ax, self.ay]
    }

    pub fn from_array(a: [S; TUPLE_DIM]) -> Self {
        Self { dx: a[0], dy: a[1], dtheta: a[2], px: a[3], py: a[4], ax: a[5], ay: a[6] }
    }

    pub fn motion(&self) -> [S; MOTION_DIM] {
        [self.dx, self.dy, self.dtheta]
    }

    pub fn cast<T: Scalar>(&self) -> StateTuple<T> {
        StateTuple::from_array(self.to_array().map(|v| T::lit(v.as_f64())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    GoalReached,
    StepLimit,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::GoalReached => "GoalReached",
            Terminal::StepLimit => "StepLimit",
        }
    }
}

/// One executed push: the state it was applied in, the push itself and the tuple observed
/// at that state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStep<S> {
    pub state: WorldState<S>,
    pub action: PushAction<S>,
    pub tuple: StateTuple<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode<S> {
    pub params: ObjectParams,
    pub start: Pose2D<S>,
    pub goal: Pose2D<S>,
    pub steps: Vec<EpisodeStep<S>>,
    /// State after the last push.
    pub final_state: WorldState<S>,
    pub terminal: Terminal,
}

impl<S: Scalar> Episode<S> {
    pub fn final_error(&self) -> FinalError<S> {
        FinalError::between(&self.final_state.object, &self.goal)
    }

    pub fn tuples(&self) -> impl Iterator<Item = &StateTuple<S>> {
        self.steps.iter().map(|s| &s.tuple)
    }

    /// Recomputes every tuple from the stored world states.
    pub fn rederive_tuples(&self) -> Vec<StateTuple<S>> {
        let mut out = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let prev = if i == 0 { &step.state } else { &self.steps[i - 1].state };
            out.push(observe_state_tuple(prev, &step.state, &step.action));
        }
        out
    }

    /// Same episode with every world position shifted by `offset`.
    pub fn translated(&self, offset: Vec2<S>) -> Self {
        let shift = |p: &Pose2D<S>| Pose2D { x: p.x + offset.x, y: p.y + offset.y, theta: p.theta };
        Self {
            params: self.params,
            start: shift(&self.start),
            goal: shift(&self.goal),
            steps: self
                .steps
                .iter()
                .map(|s| EpisodeStep { state: s.state.translated(offset), ..*s })
                .collect(),
            final_state: self.final_state.translated(offset),
            terminal: self.terminal,
        }
    }
}

/// Window of consecutive tuples and the motion of the step right after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence<S> {
    pub input: Vec<StateTuple<S>>,
    pub target: [S; MOTION_DIM],
}

/// Draws one square object uniformly from `ranges`.
pub fn sample_object<R: Rng + ?Sized>(rng: &mut R, ranges: &ParamRanges) -> ObjectParams {
    let mut draw = |(lo, hi): (f64, f64)| rng.gen_range(lo..=hi);
    let size = draw(ranges.size);
    ObjectParams {
        length: size,
        width: size,
        height: OBJECT_HEIGHT,
        mass: draw(ranges.mass),
        mu_slide: draw(ranges.mu_slide),
        mu_rot: draw(ranges.mu_rot),
        damping: draw(ranges.damping),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectConfig {
    pub sim: SimConfig,
    pub max_steps: usize,
    pub goal_tier: ThresholdTier,
    pub min_goal_distance: f64,
    /// Pusher start offset along the rear face, as a fraction of the half width.
    pub pusher_jitter: f64,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            max_steps: 60,
            goal_tier: ThresholdTier::Mid,
            min_goal_distance: 0.15,
            pusher_jitter: 0.3,
        }
    }
}

/// Uniform start and goal poses with the object fully inside the workspace and the goal at
/// least `min_goal_distance` away.
pub fn sample_start_goal<S: Scalar, R: Rng + ?Sized>(rng: &mut R, params: &ObjectParams, cfg: &CollectConfig) -> (Pose2D<S>, Pose2D<S>) {
    let margin = params.half_diagonal() + 1e-3;
    let (lo, hi) = (cfg.sim.workspace_min, cfg.sim.workspace_max);
    let pose = |rng: &mut R| {
        let x = rng.gen_range(lo.0 + margin..=hi.0 - margin);
        let y = rng.gen_range(lo.1 + margin..=hi.1 - margin);
        let t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        Pose2D::new(S::lit(x).snap(), S::lit(y).snap(), S::lit(t))
    };
    let start = pose(rng);
    loop {
        let goal = pose(rng);
        if (goal.position() - start.position()).norm().as_f64() >= cfg.min_goal_distance {
            return (start, goal);
        }
    }
}

/// Runs `generator` from `start` until the goal tier is met or `max_steps` pushes were made.
pub fn run_episode<S: Scalar, G: ActionSource<S> + ?Sized>(
    mut env: PushEnv<S>,
    generator: &mut G,
    rng: &mut dyn RngCore,
    max_steps: usize,
    goal_tier: ThresholdTier,
) -> Episode<S> {
    let start = env.state().object;
    let mut steps = Vec::new();
    let mut prev = *env.state();
    let mut terminal = Terminal::StepLimit;
    for _ in 0..max_steps {
        let curr = *env.state();
        if success(&FinalError::between(&curr.object, &env.goal), goal_tier) {
            terminal = Terminal::GoalReached;
            break;
        }
        let action = generator.next_action(&env, rng);
        let recorded = action.unwrap_or(PushAction { direction: Vec2::new(S::one(), S::zero()), magnitude: S::zero() });
        let tuple = observe_state_tuple(&prev, &curr, &recorded);
        steps.push(EpisodeStep { state: curr, action: recorded, tuple });
        env.apply(action.as_ref());
        prev = curr;
    }
    let final_state = *env.state();
    if terminal == Terminal::StepLimit && success(&FinalError::between(&final_state.object, &env.goal), goal_tier) {
        terminal = Terminal::GoalReached;
    }
    Episode { params: env.params, start, goal: env.goal, steps, final_state, terminal }
}

/// Samples start, goal and pusher offset, then runs one episode with `generator`.
pub fn collect_episode<S: Scalar, G: ActionSource<S> + ?Sized, R: RngCore>(
    params: &ObjectParams,
    generator: &mut G,
    rng: &mut R,
    cfg: &CollectConfig,
) -> Result<Episode<S>> {
    let (start, goal) = sample_start_goal::<S, R>(rng, params, cfg);
    let lateral = rng.gen_range(-cfg.pusher_jitter..=cfg.pusher_jitter) * 0.5 * params.width;
    let offset = Vec2::new(S::lit(-0.5 * params.length), S::lit(lateral));
    let env = PushEnv::new(cfg.sim, *params, start, goal, offset)?;
    Ok(run_episode(env, generator, rng, cfg.max_steps, cfg.goal_tier))
}

/// Every window of `k + 1` consecutive tuples that has a successor step, in episode order.
pub fn build_training_set<S: Scalar>(episodes: &[Episode<S>], k: usize) -> Result<Vec<TrainingSequence<S>>> {
    if k == 0 {
        return Err(Error::Config("history parameter K must be at least 1".into()));
    }
    let mut out = Vec::new();
    for ep in episodes {
        let tuples: Vec<StateTuple<S>> = ep.tuples().copied().collect();
        if tuples.len() < k + 2 {
            continue;
        }
        for end in k..tuples.len() - 1 {
            out.push(TrainingSequence { input: tuples[end - k..=end].to_vec(), target: tuples[end + 1].motion() });
        }
    }
    Ok(out)
}

/// Per-channel summary of the tuples inside a set of training windows.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub count: usize,
    pub mean: [f64; TUPLE_DIM],
    pub std: [f64; TUPLE_DIM],
    pub min: [f64; TUPLE_DIM],
    pub max: [f64; TUPLE_DIM],
}

/// Welford statistics over every input tuple of every sequence (population std).
pub fn dataset_stats<S: Scalar>(sequences: &[TrainingSequence<S>]) -> Result<DatasetStats> {
    if sequences.is_empty() {
        return Err(Error::Empty("training sequences"));
    }
    let mut n = 0usize;
    let mut mean = [0.0; TUPLE_DIM];
    let mut m2 = [0.0; TUPLE_DIM];
    let mut min = [f64::INFINITY; TUPLE_DIM];
    let mut max = [f64::NEG_INFINITY; TUPLE_DIM];
    for t in sequences.iter().flat_map(|s| s.input.iter()) {
        n += 1;
        for (c, v) in t.to_array().into_iter().enumerate() {
            let v = v.as_f64();
            let delta = v - mean[c];
            mean[c] += delta / n as f64;
            m2[c] += delta * (v - mean[c]);
            min[c] = min[c].min(v);
            max[c] = max[c].max(v);
        }
    }
    let std = m2.map(|m| (m / n as f64).max(0.0).sqrt());
    Ok(DatasetStats { count: sequences.len(), mean, std, min, max })
}
