use crate::sim::{wrap_angle, Pose2D};
use crate::Scalar;

/// Absolute final pose errors, measured in the goal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalError<S> {
    pub e_x: S,
    pub e_y: S,
    pub e_theta: S,
}

impl<S: Scalar> FinalError<S> {
    pub fn new(e_x: S, e_y: S, e_theta: S) -> Self {
        Self { e_x: e_x.abs(), e_y: e_y.abs(), e_theta: e_theta.abs() }
    }

    /// Error of `pose` with respect to `goal`: position difference rotated into the goal
    /// frame and the wrapped heading difference.
    pub fn between(pose: &Pose2D<S>, goal: &Pose2D<S>) -> Self {
        let d = goal.to_local(pose.position());
        Self::new(d.x, d.y, wrap_angle(pose.theta - goal.theta))
    }
}

/// Success thresholds, tightest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThresholdTier {
    Tight,
    Mid,
    Loose,
}

impl ThresholdTier {
    pub const ALL: [ThresholdTier; 3] = [ThresholdTier::Tight, ThresholdTier::Mid, ThresholdTier::Loose];

    /// `(E_x, E_y, E_theta)` upper bounds in meters, meters, radians.
    pub fn bounds(self) -> (f64, f64, f64) {
        match self {
            ThresholdTier::Tight => (0.025, 0.010, 0.052),
            ThresholdTier::Mid => (0.035, 0.015, 0.087),
            ThresholdTier::Loose => (0.050, 0.025, 0.17),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThresholdTier::Tight => "tight",
            ThresholdTier::Mid => "mid",
            ThresholdTier::Loose => "loose",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

/// All three errors strictly below the tier's bounds.
pub fn success<S: Scalar>(err: &FinalError<S>, tier: ThresholdTier) -> bool {
    let (bx, by, bt) = tier.bounds();
    err.e_x.as_f64() < bx && err.e_y.as_f64() < by && err.e_theta.as_f64() < bt
}

pub const SCORE_SIGMA: f64 = 1e-7;

/// `1 / (E_x + 3 E_y + 0.5 E_theta + 1e-7)`.
pub fn score<S: Scalar>(err: &FinalError<S>) -> f64 {
    1.0 / (err.e_x.as_f64() + 3.0 * err.e_y.as_f64() + 0.5 * err.e_theta.as_f64() + SCORE_SIGMA)
}
