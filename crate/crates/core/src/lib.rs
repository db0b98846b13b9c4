//! Smooth, time-invariant energy pumping-and-damping (EPD) IDA-PBC
//! regulation of driftless nonholonomic systems in chained form.
//!
//! * [`systems`]: the plant family `ẋ = S(x)u` and its constraints.
//! * [`energy`]: Hamiltonian split, Lyapunov function `V` and dissipation `Q`.
//! * [`controllers`]: EPD laws (closed form and `(SᵀS)⁻¹Sᵀ` assembly) plus
//!   Pomet and Astolfi comparison laws.
//! * [`sim`]: RK4 / Dormand–Prince closed-loop simulation with ZOH
//!   measurement noise.
//! * [`verify`]: pointwise structural checks (matching PDE, skew symmetry,
//!   EPD inequality, port-Hamiltonian equivalence).
//! * [`harness`]: experiment presets, config files, bisection and exports.
//!
//! The numerical core is generic over [`Scalar`] (`f32`, `f64`); the
//! aliases below fix the scalar to `f64`, which is what the harness uses.

// `!(a > b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controllers;
pub mod energy;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod scalar;
pub mod sim;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type StateVectorF64 = systems::StateVector<f64>;
pub type StateVectorF32 = systems::StateVector<f32>;
pub type EnergyParamsF64 = energy::EnergyParams<f64>;
pub type EnergyParamsF32 = energy::EnergyParams<f32>;
pub type ControllerSpecF64 = controllers::ControllerSpec<f64>;
pub type ControllerSpecF32 = controllers::ControllerSpec<f32>;
pub type ScenarioF64 = sim::Scenario<f64>;
pub type ScenarioF32 = sim::Scenario<f32>;
pub type TrajectoryF64 = sim::Trajectory<f64>;
pub type TrajectoryF32 = sim::Trajectory<f32>;
pub type SolverSettingsF64 = sim::SolverSettings<f64>;
pub type MatF64 = linalg::Mat<f64>;
