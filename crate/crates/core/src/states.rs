//! Initial density matrices built from Gaussian wave packets.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{trace, DensityField, GridError, SpatialGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("Gaussian width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("state leaks past the boundary: |x_c| + 3σ = {reach} exceeds L = {half_width}")]
    Leaks { reach: f64, half_width: f64 },
    #[error("peak centre must be positive, got {0}")]
    NonPositiveCenter(f64),
    #[error("width {sigma} is under-resolved by spacing {spacing}: fewer than 8 nodes within ±σ")]
    UnderResolved { sigma: f64, spacing: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: f64,
    pub width: f64,
}

impl GaussianSpec {
    pub fn new(center: f64, width: f64) -> Self {
        Self { center, width }
    }

    fn check(&self, grid: &SpatialGrid) -> Result<(), StateError> {
        if !(self.width > 0.0) {
            return Err(StateError::NonPositiveWidth(self.width));
        }
        let reach = self.center.abs() + 3.0 * self.width;
        if reach >= grid.half_width() {
            return Err(StateError::Leaks {
                reach,
                half_width: grid.half_width(),
            });
        }
        Ok(())
    }

    /// Normalized amplitude `(2πσ²)^(-1/4) exp(-(x - x_c)² / 4σ²)`.
    pub fn amplitude(&self, x: f64) -> f64 {
        let s2 = self.width * self.width;
        (2.0 * PI * s2).powf(-0.25) * (-(x - self.center).powi(2) / (4.0 * s2)).exp()
    }
}

/// Width of the ground state of a harmonic well of frequency `omega`:
/// `σ = sqrt(ħ / 2Mω)`.
pub fn ground_state_width(hbar: f64, mass: f64, omega: f64) -> f64 {
    (hbar / (2.0 * mass * omega)).sqrt()
}

/// `ρ̃ = ψψ*` from a real wave function sampled on the grid, with the
/// Dirichlet ring zeroed and the grid trace scaled to exactly 1.
fn pure_from_amplitudes(grid: &SpatialGrid, psi: &[f64]) -> Result<DensityField, StateError> {
    let n = grid.n_points();
    let mut field = DensityField::zeros(grid);
    {
        let v = field.values_mut();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                v[[i, j]] = Complex64::new(psi[i] * psi[j], 0.0);
            }
        }
    }
    let tr = trace(&field)?;
    field.scale(1.0 / tr);
    Ok(field)
}

/// Pure state of a single Gaussian packet.
pub fn gaussian_pure(g: &GaussianSpec, grid: &SpatialGrid) -> Result<DensityField, StateError> {
    g.check(grid)?;
    let psi: Vec<f64> = grid.points().iter().map(|&x| g.amplitude(x)).collect();
    pure_from_amplitudes(grid, &psi)
}

/// `N² = 1 / (2 (1 + exp(-x_c² / 2σ²)))`: normalization of `φ₋ + φ₊`
/// including the overlap of the two packets.
pub fn double_gaussian_norm_sq(center: f64, width: f64) -> f64 {
    1.0 / (2.0 * (1.0 + (-center * center / (2.0 * width * width)).exp()))
}

/// Pure state `ψ = N (φ₋ + φ₊)` with identical packets at `±x_c`.
pub fn double_gaussian(center: f64, width: f64, grid: &SpatialGrid) -> Result<DensityField, StateError> {
    if !(center > 0.0) {
        return Err(StateError::NonPositiveCenter(center));
    }
    let g_plus = GaussianSpec::new(center, width);
    g_plus.check(grid)?;
    if 2.0 * width < 8.0 * grid.spacing() {
        return Err(StateError::UnderResolved {
            sigma: width,
            spacing: grid.spacing(),
        });
    }
    let g_minus = GaussianSpec::new(-center, width);
    let norm = double_gaussian_norm_sq(center, width).sqrt();
    let pts = grid.points();
    let n = pts.len();
    // mirror-paired evaluation so that ψ(x) == ψ(-x) bit for bit
    let psi: Vec<f64> = (0..n)
        .map(|k| {
            let x = pts[k].abs();
            norm * (g_plus.amplitude(x) + g_minus.amplitude(x))
        })
        .collect();
    pure_from_amplitudes(grid, &psi)
}

/// Incoherent mixture `½(|φ₋⟩⟨φ₋| + |φ₊⟩⟨φ₊|)`: the double Gaussian with its
/// off-diagonal blocks removed.
pub fn double_gaussian_mixture(center: f64, width: f64, grid: &SpatialGrid) -> Result<DensityField, StateError> {
    let left = gaussian_pure(&GaussianSpec::new(-center, width), grid)?;
    let right = gaussian_pure(&GaussianSpec::new(center, width), grid)?;
    let mut values = left.into_values() + right.values();
    values.mapv_inplace(|z| z * 0.5);
    Ok(DensityField::from_values(grid, values)?)
}
