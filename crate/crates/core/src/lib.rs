//! Planar pushing with a recurrent dynamics model inside a sampling-based controller.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the usual `f64` instantiation.

mod error;
pub mod scalar;
pub mod seed;
pub mod textfmt;

pub mod control;
pub mod dataset;
pub mod eval;
pub mod model;
pub mod policy;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Pose = sim::Pose2D<f64>;
pub type Vector = sim::Vec2<f64>;
pub type World = sim::WorldState<f64>;
pub type Action = sim::PushAction<f64>;
pub type Env = sim::PushEnv<f64>;
pub type Tuple = dataset::StateTuple<f64>;
pub type EpisodeF64 = dataset::Episode<f64>;
pub type Weights = model::ModelWeights<f64>;
pub type WeightsF32 = model::ModelWeights<f32>;
