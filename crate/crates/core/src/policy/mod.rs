//! Model-free pushing: DDPG with hindsight relabeling, and a scripted push-toward-goal
//! generator used when no trained policy is at hand.

mod ddpg;
mod her;
mod io;
pub mod mlp;
mod replay;
mod scripted;

pub use ddpg::{
    critic_targets, ddpg_update, evaluate_policy, features, play_episode, policy_action, to_raw_action, to_world_action, train_policy, Agent, AgentConfig,
    DdpgConfig, PolicySource, TrainPolicyReport, UpdateStats, FEATURE_SCALE,
};
pub use her::{her_relabel, relabel};
pub use io::{read_agent, write_agent, AGENT_MAGIC, AGENT_VERSION};
pub use replay::ReplayBuffer;
pub use scripted::{scripted_action, ScriptedGenerator};

use rand::RngCore;

use crate::eval::{success, FinalError, ThresholdTier};
use crate::sim::{Pose2D, PushAction, PushEnv, Vec2};
use crate::Scalar;

/// Dimension of the MDP state vector.
pub const MDP_STATE_DIM: usize = 8;
/// Dimension of the policy action.
pub const ACTION_DIM: usize = 2;

/// Anything that can choose the next push for an episode in progress.
pub trait ActionSource<S: Scalar> {
    /// `None` holds the pusher still for one step.
    fn next_action(&mut self, env: &PushEnv<S>, rng: &mut dyn RngCore) -> Option<PushAction<S>>;
}

/// World-frame object pose, pusher position and goal pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpState<S> {
    pub object: Pose2D<S>,
    pub pusher: Vec2<S>,
    pub goal: Pose2D<S>,
}

impl<S: Scalar> MdpState<S> {
    pub fn from_env(env: &PushEnv<S>) -> Self {
        let st = env.state();
        Self { object: st.object, pusher: st.pusher, goal: env.goal }
    }

    /// `[X_o, Y_o, theta_o, X_r, Y_r, X_g, Y_g, theta_g]`.
    pub fn to_array(&self) -> [S; MDP_STATE_DIM] {
        [self.object.x, self.object.y, self.object.theta, self.pusher.x, self.pusher.y, self.goal.x, self.goal.y, self.goal.theta]
    }

    pub fn with_goal(&self, goal: Pose2D<S>) -> Self {
        Self { goal, ..*self }
    }
}

/// World-frame pusher displacement command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolicyAction<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> PolicyAction<S> {
    pub fn zero() -> Self {
        Self { x: S::zero(), y: S::zero() }
    }

    /// Clips each component to `[-limit, limit]`.
    pub fn clipped(self, limit: S) -> Self {
        Self { x: self.x.max(-limit).min(limit), y: self.y.max(-limit).min(limit) }
    }

    /// Expresses the command as a push in the frame of an object at `object`.
    pub fn to_push(&self, object: &Pose2D<S>) -> Option<PushAction<S>> {
        let local = Vec2::new(self.x, self.y).rotate(-object.theta);
        PushAction::new(local, local.norm())
    }
}

/// Sparse reward: `+1` when the achieved pose is strictly inside `tier`, else `-1`.
pub fn reward<S: Scalar>(achieved: &Pose2D<S>, goal: &Pose2D<S>, tier: ThresholdTier) -> S {
    if success(&FinalError::between(achieved, goal), tier) {
        S::one()
    } else {
        -S::one()
    }
}

/// Reward of an MDP state against its own goal.
pub fn state_reward<S: Scalar>(next_state: &MdpState<S>, tier: ThresholdTier) -> S {
    reward(&next_state.object, &next_state.goal, tier)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<S> {
    pub state: MdpState<S>,
    pub action: PolicyAction<S>,
    pub reward: S,
    pub next_state: MdpState<S>,
    pub done: bool,
    /// Object pose reached after the action.
    pub achieved_goal: Pose2D<S>,
}
