//! Exact dynamics, pulse design and truncated Fock-space simulation for
//! bosonic modes coupled through a common channel beyond the rotating-wave
//! approximation.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`.

// Parameter checks are written `!(x > 0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fockspace;
mod linalg;
pub mod pulsedesign;
pub mod scalar;
pub mod tasks;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type SystemConfig64 = analytic::SystemConfig<f64>;
pub type CouplingWeights64 = analytic::CouplingWeights<f64>;
pub type BogoliubovTransform64 = analytic::BogoliubovTransform<f64>;
pub type PulseParams64 = pulsedesign::PulseParams<f64>;
pub type TruncatedState64 = fockspace::TruncatedState<f64>;
pub type QstTask64 = tasks::QstTask<f64>;
pub type Numerics64 = tasks::Numerics<f64>;
