use rand::Rng;

use super::{reward, Transition};
use crate::eval::ThresholdTier;
use crate::Scalar;

/// Hindsight relabeling with the future strategy: for each transition, `k_future` goals are
/// drawn from the poses achieved at the same or a later step of the episode and the reward
/// is recomputed against them. A relabeled transition is terminal when it earns `+1`.
pub fn her_relabel<S: Scalar, R: Rng + ?Sized>(episode: &[Transition<S>], k_future: usize, tier: ThresholdTier, rng: &mut R) -> Vec<Transition<S>> {
    let mut out = Vec::with_capacity(episode.len() * k_future);
    for (t, tr) in episode.iter().enumerate() {
        for _ in 0..k_future {
            let j = rng.gen_range(t..episode.len());
            out.push(relabel(tr, episode[j].achieved_goal, tier));
        }
    }
    out
}

/// `tr` with its goal replaced by `goal`.
pub fn relabel<S: Scalar>(tr: &Transition<S>, goal: crate::sim::Pose2D<S>, tier: ThresholdTier) -> Transition<S> {
    let r = reward(&tr.achieved_goal, &goal, tier);
    Transition {
        state: tr.state.with_goal(goal),
        next_state: tr.next_state.with_goal(goal),
        reward: r,
        done: r > S::zero(),
        ..*tr
    }
}
