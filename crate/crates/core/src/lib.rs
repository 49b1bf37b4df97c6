//! Quasistatic model of flex-and-flip grasp acquisition on thin elastic strips.
//!
//! * [`elastica`]: minimum flexural energy shapes, contact forces, friction
//!   bounds and energy fields for a planar inextensible rod.
//! * [`finger`]: constant-curvature soft finger kinematics and fingertip paths.
//! * [`grasp`]: coupled flex simulation, outcome classification, lattice
//!   sweeps and the feasibility band fit.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

// `!(a > b)` is how parameter checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elastica;
pub mod error;
pub mod finger;
pub mod grasp;
mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Vec2};

pub type Vec2d = scalar::Vec2<f64>;
pub type RodSpec64 = elastica::RodSpec<f64>;
pub type RodShape64 = elastica::RodShape<f64>;
pub type SolverConfig64 = elastica::SolverConfig<f64>;
pub type ContactSolution64 = elastica::ContactSolution<f64>;
pub type EnergyField64 = elastica::EnergyField<f64>;
pub type GridSpec64 = elastica::GridSpec<f64>;
pub type FingerSpec64 = finger::FingerSpec<f64>;
pub type HandConfig64 = finger::HandConfig<f64>;
pub type PressureRamp64 = finger::PressureRamp<f64>;
pub type FingertipPath64 = finger::FingertipPath<f64>;
pub type GraspModel64 = grasp::GraspModel<f64>;
pub type FlexTrace64 = grasp::FlexTrace<f64>;
pub type AttemptOutcome64 = grasp::AttemptOutcome<f64>;
pub type SweepResult64 = grasp::SweepResult<f64>;
pub type AffineFit64 = grasp::AffineFit<f64>;
