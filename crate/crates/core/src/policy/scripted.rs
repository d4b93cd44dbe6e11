use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::{ActionSource, MdpState, PolicyAction};
use crate::sim::{PushAction, PushEnv, Vec2, DEFAULT_PUSH_MAGNITUDE};
use crate::Scalar;

/// Push-toward-goal heuristic with directional noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedGenerator {
    /// Standard deviation of the direction noise, radians.
    pub noise_std: f64,
    pub push_magnitude: f64,
    /// Largest steering angle relative to the object's push axis.
    pub max_turn: f64,
    /// Lateral contact offset used at full steering, meters.
    pub lateral_offset: f64,
    /// Gain pulling the pusher toward the desired lateral offset, 1/m.
    pub lateral_gain: f64,
}

impl Default for ScriptedGenerator {
    fn default() -> Self {
        Self {
            noise_std: 0.3,
            push_magnitude: DEFAULT_PUSH_MAGNITUDE,
            max_turn: std::f64::consts::FRAC_PI_3,
            lateral_offset: 0.02,
            lateral_gain: 20.0,
        }
    }
}

/// Aims a push from behind the object toward the goal. The bearing to the goal is taken in
/// the object frame and limited to `max_turn`; the pusher is steered to the side of the push
/// axis opposite the bearing so the object turns toward the goal. Returns the zero action
/// when the object sits exactly on the goal.
pub fn scripted_action<S: Scalar>(state: &MdpState<S>, gen: &ScriptedGenerator, rng: &mut dyn RngCore) -> PolicyAction<S> {
    if state.object == state.goal {
        return PolicyAction::zero();
    }
    let obj = state.object;
    let to_goal = obj.to_local(state.goal.position());
    let bearing = if to_goal.norm() > S::zero() { to_goal.y.atan2(to_goal.x) } else { S::zero() };
    let max_turn = S::lit(gen.max_turn);
    let alpha = bearing.max(-max_turn).min(max_turn);
    let pusher = obj.to_local(state.pusher);
    let desired_y = -(alpha / max_turn) * S::lit(gen.lateral_offset);
    let dir = Vec2::new(alpha.cos(), alpha.sin() + S::lit(gen.lateral_gain) * (desired_y - pusher.y));
    let noise = if gen.noise_std > 0.0 {
        Normal::new(0.0, gen.noise_std).expect("finite std").sample(rng)
    } else {
        0.0
    };
    let dir = dir.normalized().unwrap_or(Vec2::new(S::one(), S::zero())).rotate(S::lit(noise)).rotate(obj.theta);
    let a = dir * S::lit(gen.push_magnitude);
    PolicyAction { x: a.x, y: a.y }
}

impl<S: Scalar> ActionSource<S> for ScriptedGenerator {
    fn next_action(&mut self, env: &PushEnv<S>, rng: &mut dyn RngCore) -> Option<PushAction<S>> {
        let state = MdpState::from_env(env);
        scripted_action(&state, self, rng).to_push(&state.object)
    }
}
