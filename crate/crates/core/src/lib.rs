//! Density-matrix simulation of quantum Brownian motion in an environment
//! of damped harmonic oscillators.
//!
//! The state is the reduced density matrix `ρ̃(x, y, t)` sampled on a square
//! grid. It evolves under the high-temperature Caldeira-Leggett master
//! equation in which the bath damping `μ` appears only through an extra
//! inverted-harmonic term `V_D(x) = -½ M γ μ x²` added to the system
//! potential.

pub mod evolution;
pub mod grid;
pub mod harness;
pub mod observables;
pub mod potentials;
pub mod states;
pub mod units;

pub use grid::{DensityField, Quadrant, SpatialGrid};
