//! Two-dimensional immersed-boundary fluid-structure interaction with
//! spline-driven prescribed kinematics.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what the solver and
//! the CLI use.

// `!(x > 0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod coupling;
pub mod engine;
pub mod error;
pub mod fibers;
pub mod fluid;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod linalg;
pub mod scalar;
pub mod scenario;
pub mod vec2;

pub use config::{load_config, ScenarioKind, SimConfig};
pub use error::{Error, Result};
pub use scalar::Real;
pub use vec2::Vec2;

pub type Point = vec2::Vec2<f64>;
pub type Interpolant = kinematics::CubicInterpolant<f64>;
pub type Schedule = kinematics::PhaseSchedule<f64>;
pub type State = kinematics::StateMatrix<f64>;
pub type Mesh = geometry::LagrangianMesh<f64>;
pub type Grid = fluid::Grid<f64>;
pub type Fluid = fluid::FluidState<f64>;
pub type Solver = fluid::FluidSolver<f64>;
