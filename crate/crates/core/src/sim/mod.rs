//! Quasi-static planar pushing of a rectangular object by a point pusher.
//!
//! The support friction is modeled by an ellipsoidal limit surface with force radius
//! `f_max = mu_slide * m * g` and torque radius `m_max = f_max * c + mu_rot * m * g`, where
//! `c` is the mean distance from the centroid to the (uniform) support area. The twist of
//! the object is normal to the limit surface at the applied wrench; the pusher contact is
//! Coulomb with a fixed coefficient and resolves into sticking or sliding.
//!
//! All contact computations happen in the object frame. World positions are kept on a
//! fixed binary lattice (see [`Scalar::snap`]) so that translating a whole episode leaves
//! every relative quantity bit-identical.

mod env;
mod geometry;
mod motion;
mod step;

pub use env::PushEnv;
pub use geometry::{wrap_angle, Pose2D, Vec2};
pub use motion::{mean_support_radius, motion_model, push_response, ContactMode, Face, LimitSurface, PushResponse, Twist};
pub use step::{observe_state_tuple, reset, signed_distance, step, step_with_report, StepReport};

use crate::error::{Error, Result};
use crate::Scalar;

pub const GRAVITY: f64 = 9.81;
/// Height shared by all simulated objects.
pub const OBJECT_HEIGHT: f64 = 0.025;
/// Default length of one push.
pub const DEFAULT_PUSH_MAGNITUDE: f64 = 0.005;

/// Randomized physical properties of one rectangular object. `length` runs along the
/// object's x axis (the push axis), `width` along its y axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectParams {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub mass: f64,
    pub mu_slide: f64,
    pub mu_rot: f64,
    pub damping: f64,
}

/// Closed parameter ranges for domain randomization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub size: (f64, f64),
    pub mass: (f64, f64),
    pub mu_slide: (f64, f64),
    pub mu_rot: (f64, f64),
    pub damping: (f64, f64),
}

impl ParamRanges {
    pub const DEFAULT: ParamRanges = ParamRanges {
        size: (0.08, 0.25),
        mass: (0.01, 0.8),
        mu_slide: (0.1, 1.0),
        mu_rot: (0.001, 0.01),
        damping: (0.01, 0.015),
    };
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl ObjectParams {
    pub fn validate(&self) -> Result<()> {
        let r = ParamRanges::DEFAULT;
        let check = |name: &str, v: f64, (lo, hi): (f64, f64)| {
            if v.is_finite() && v >= lo && v <= hi {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {v} outside [{lo}, {hi}]")))
            }
        };
        check("length", self.length, r.size)?;
        check("width", self.width, r.size)?;
        check("mass", self.mass, r.mass)?;
        check("mu_slide", self.mu_slide, r.mu_slide)?;
        check("mu_rot", self.mu_rot, r.mu_rot)?;
        check("damping", self.damping, r.damping)?;
        if !(self.height > 0.0) {
            return Err(Error::InvalidParams(format!("height = {}", self.height)));
        }
        Ok(())
    }

    pub fn half_extents<S: Scalar>(&self) -> Vec2<S> {
        Vec2::new(S::lit(0.5 * self.length), S::lit(0.5 * self.width))
    }

    /// Radius of the smallest circle containing the rectangle.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }
}

/// Simulator settings shared by every episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub workspace_min: (f64, f64),
    pub workspace_max: (f64, f64),
    /// Maximum allowed penetration and the distance under which the pusher counts as touching.
    pub contact_tolerance: f64,
    /// Pusher-object Coulomb coefficient.
    pub contact_friction: f64,
    pub max_step: f64,
    pub max_substep: f64,
    /// Pushes needing more force than this stall against the object.
    pub max_pusher_force: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            workspace_min: (0.0, 0.0),
            workspace_max: (1.0, 1.0),
            contact_tolerance: 1e-6,
            contact_friction: 0.3,
            max_step: 0.01,
            max_substep: 0.0005,
            max_pusher_force: 6.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.workspace_max.0 > self.workspace_min.0
            && self.workspace_max.1 > self.workspace_min.1
            && self.contact_tolerance > 0.0
            && self.contact_friction >= 0.0
            && self.max_step > 0.0
            && self.max_substep > 0.0
            && self.max_pusher_force > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid sim settings: {self:?}")))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.workspace_min.0 && x <= self.workspace_max.0 && y >= self.workspace_min.1 && y <= self.workspace_max.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState<S> {
    pub object: Pose2D<S>,
    pub pusher: Vec2<S>,
    pub in_contact: bool,
}

impl<S: Scalar> WorldState<S> {
    /// Pusher position in the object frame.
    pub fn pusher_local(&self) -> Vec2<S> {
        self.object.to_local(self.pusher)
    }

    /// Same state translated by `offset` in the world frame.
    pub fn translated(&self, offset: Vec2<S>) -> Self {
        Self {
            object: Pose2D { x: self.object.x + offset.x, y: self.object.y + offset.y, theta: self.object.theta },
            pusher: self.pusher + offset,
            in_contact: self.in_contact,
        }
    }
}

/// One push, expressed in the object frame at the time it is issued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushAction<S> {
    pub direction: Vec2<S>,
    pub magnitude: S,
}

impl<S: Scalar> PushAction<S> {
    /// Normalizes `direction`; `None` for a zero direction or non-positive magnitude.
    pub fn new(direction: Vec2<S>, magnitude: S) -> Option<Self> {
        let direction = direction.normalized()?;
        if magnitude > S::zero() && magnitude.is_finite() {
            Some(Self { direction, magnitude })
        } else {
            None
        }
    }

    /// Push of `magnitude` along the object's +x axis.
    pub fn forward(magnitude: S) -> Self {
        Self { direction: Vec2::new(S::one(), S::zero()), magnitude }
    }

    /// Displacement vector in the object frame.
    pub fn displacement(&self) -> Vec2<S> {
        self.direction * self.magnitude
    }
}
