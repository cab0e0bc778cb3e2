//! Thin-film free-boundary solver: a rigid solid sinking into a liquid film,
//! with a moving contact point and a fixed contact angle.
//!
//! The core is generic over the scalar type through [`num::Real`] (f32 or
//! f64); the aliases at the crate root fix the production scalar to f64.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod interior;
pub mod linalg;
pub mod num;
pub mod output;
pub mod poincare;
pub mod solid;
pub mod transform;

pub use error::{Error, Result};
pub use num::Real;

/// Production-scalar aliases (f64).
pub type SolidProfile = solid::SolidProfile<f64>;
pub type SolidKind = solid::SolidKind<f64>;
pub type Poly = solid::Poly<f64>;
pub type Grid = grid::Grid<f64>;
pub type GhostClosure = grid::GhostClosure<f64>;
pub type FilmState = evolution::FilmState<f64>;
pub type StepperConfig = evolution::StepperConfig<f64>;
pub type Geometry = evolution::Geometry<f64>;
pub type Solver<'a> = evolution::Solver<'a, f64>;
pub type LinearMap = transform::LinearMap<f64>;
pub type CutoffMap = transform::CutoffMap<f64>;
pub type BoundaryData = transform::BoundaryData<f64>;
pub type InterfaceEnergies = equilibrium::InterfaceEnergies<f64>;
pub type EquilibriumSolution = equilibrium::EquilibriumSolution<f64>;
pub type DiagnosticsRecord = diagnostics::DiagnosticsRecord<f64>;
pub type DecayFit = diagnostics::DecayFit<f64>;
pub type PoincareResult = poincare::PoincareResult<f64>;
