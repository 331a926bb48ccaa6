pub mod checkers;
pub mod config;
pub mod dynamics;
pub mod numerics;
pub mod sets;
pub mod solvers;
pub mod tangent;

pub use checkers::{check, CheckOptions, Decision, DynamicalSystem, Verdict};
pub use config::Tolerances;
pub use numerics::{Matrix, NumericsError};
pub use sets::ConvexSet;
