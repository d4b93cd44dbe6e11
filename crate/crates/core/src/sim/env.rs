use super::{reset, step_with_report, ObjectParams, Pose2D, PushAction, SimConfig, StepReport, Vec2, WorldState};
use crate::error::Result;
use crate::Scalar;

/// One pushing episode in progress: object, goal and the current world state.
#[derive(Debug, Clone)]
pub struct PushEnv<S> {
    pub config: SimConfig,
    pub params: ObjectParams,
    pub goal: Pose2D<S>,
    state: WorldState<S>,
    steps: usize,
}

impl<S: Scalar> PushEnv<S> {
    pub fn new(config: SimConfig, params: ObjectParams, start: Pose2D<S>, goal: Pose2D<S>, pusher_offset: Vec2<S>) -> Result<Self> {
        let state = reset(&config, &params, start, goal, pusher_offset)?;
        Ok(Self { config, params, goal, state, steps: 0 })
    }

    /// Episode starting with the pusher at the midpoint of the rear face.
    pub fn behind(config: SimConfig, params: ObjectParams, start: Pose2D<S>, goal: Pose2D<S>) -> Result<Self> {
        let offset = Vec2::new(S::lit(-0.5 * params.length), S::zero());
        Self::new(config, params, start, goal, offset)
    }

    pub fn state(&self) -> &WorldState<S> {
        &self.state
    }

    /// Number of pushes issued so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Applies a push; `None` counts as a step in which the pusher holds still.
    pub fn apply(&mut self, action: Option<&PushAction<S>>) -> StepReport {
        self.steps += 1;
        match action {
            Some(a) => {
                let (next, report) = step_with_report(&self.state, &self.params, &self.config, a);
                self.state = next;
                report
            }
            None => StepReport::default(),
        }
    }
}
