//! Structure-preserving simulation of a damped wave map for a liquid-crystal
//! director coupled to an anisotropic electrostatic potential.
//!
//! The director `d` and angular momentum `w` live on a uniform cell grid and
//! are advanced by an implicit midpoint rule whose director update is an
//! exact rotation. The potential is a P1 finite-element function on a
//! triangulation aligned with the cells. Each time step is solved by a
//! fixed-point iteration on `w`.

pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod grid;
pub mod rotation;
pub mod sparse;
pub mod stepper;
pub mod vec3;

pub use error::{FemError, GridError, ParamError, SolverError, StepError};
pub use grid::{CellField, GridSpec};
pub use stepper::{CflMode, Forcing, Params, State, StepStats, Stepper};
