//! System potentials.
//!
//! `V_R` is the renormalized quartic double well, `V_D = -½ M γ μ x²` the
//! inverted harmonic term induced by the damping of the bath oscillators,
//! and `V_F = V_R + V_D` the potential the system actually feels.

use serde::{Deserialize, Serialize};

use crate::grid::SpatialGrid;

/// Parameters of the reference configuration used to fix the slope of the
/// linear control potential: `ω_R = 0.025 fs⁻¹`, `x0 = 2.5 Å`,
/// `γ = 2.5e-4 fs⁻¹`, `μ = 1 fs⁻¹`, evaluated at `x = 2.5 Å`.
pub mod reference {
    pub const OMEGA_R: f64 = 0.025;
    pub const X0: f64 = 2.5;
    pub const GAMMA: f64 = 2.5e-4;
    pub const MU: f64 = 1.0;
    pub const SLOPE_POINT: f64 = 2.5;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingParams {
    /// Relaxation rate γ in fs⁻¹.
    pub gamma: f64,
    /// Damping rate μ of the bath oscillators in fs⁻¹.
    pub mu: f64,
}

impl DampingParams {
    pub fn new(gamma: f64, mu: f64) -> Self {
        debug_assert!(gamma >= 0.0 && mu >= 0.0);
        Self { gamma, mu }
    }

    pub fn undamped(gamma: f64) -> Self {
        Self { gamma, mu: 0.0 }
    }

    pub fn product(&self) -> f64 {
        self.gamma * self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `V_R(x) = (M ω_R² / 2 x0²)(x - x0)²(x + x0)²`, plus `V_D`.
    QuarticDoubleWell { omega_r: f64, x0: f64 },
    /// `V(x) = g · G_ref · x`, applied over the whole grid; no `V_D`.
    Linear {
        slope_factor: f64,
        reference_gradient: f64,
    },
    /// `V_R = 0`; only `V_D` remains.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Particle mass in eV·fs²/Å².
    pub mass: f64,
}

impl PotentialSpec {
    pub fn quartic(omega_r: f64, x0: f64, mass: f64) -> Self {
        assert!(omega_r > 0.0 && x0 > 0.0, "quartic well needs ω_R > 0 and x0 > 0");
        Self {
            kind: PotentialKind::QuarticDoubleWell { omega_r, x0 },
            mass,
        }
    }

    /// Linear ramp whose unit slope (`g = 1`) is the reference gradient.
    pub fn linear(slope_factor: f64, mass: f64) -> Self {
        Self {
            kind: PotentialKind::Linear {
                slope_factor,
                reference_gradient: reference_gradient(mass),
            },
            mass,
        }
    }

    pub fn free(mass: f64) -> Self {
        Self {
            kind: PotentialKind::Free,
            mass,
        }
    }
}

/// `V_R(x)`; zero for the non-quartic variants.
pub fn v_renormalized(x: f64, spec: &PotentialSpec) -> f64 {
    match spec.kind {
        PotentialKind::QuarticDoubleWell { omega_r, x0 } => {
            let a = spec.mass * omega_r * omega_r / (2.0 * x0 * x0);
            let d = (x - x0) * (x + x0);
            a * d * d
        }
        _ => 0.0,
    }
}

/// `V_D(x) = -½ M γ μ x²`.
pub fn v_damping(x: f64, mass: f64, damping: &DampingParams) -> f64 {
    -0.5 * mass * damping.gamma * damping.mu * x * x
}

/// The potential entering the master equation.
pub fn v_full(x: f64, spec: &PotentialSpec, damping: &DampingParams) -> f64 {
    match spec.kind {
        PotentialKind::QuarticDoubleWell { .. } => {
            v_renormalized(x, spec) + v_damping(x, spec.mass, damping)
        }
        PotentialKind::Linear {
            slope_factor,
            reference_gradient,
        } => slope_factor * reference_gradient * x,
        PotentialKind::Free => v_damping(x, spec.mass, damping),
    }
}

/// Analytic `dV_F/dx`.
pub fn v_full_gradient(x: f64, spec: &PotentialSpec, damping: &DampingParams) -> f64 {
    let dd = -spec.mass * damping.product() * x;
    match spec.kind {
        PotentialKind::QuarticDoubleWell { omega_r, x0 } => {
            let a = spec.mass * omega_r * omega_r / (2.0 * x0 * x0);
            4.0 * a * x * (x * x - x0 * x0) + dd
        }
        PotentialKind::Linear {
            slope_factor,
            reference_gradient,
        } => slope_factor * reference_gradient,
        PotentialKind::Free => dd,
    }
}

/// `|dV_F/dx|` at the reference point under the reference configuration.
pub fn reference_gradient(mass: f64) -> f64 {
    let spec = PotentialSpec::quartic(reference::OMEGA_R, reference::X0, mass);
    let damping = DampingParams::new(reference::GAMMA, reference::MU);
    v_full_gradient(reference::SLOPE_POINT, &spec, &damping).abs()
}

/// Positions `(-x_min, +x_min)` of the two minima of `V_F`,
/// `x_min = x0 · sqrt(1 + γμ / 2ω_R²)`. `None` for non-quartic variants.
pub fn well_minima(spec: &PotentialSpec, damping: &DampingParams) -> Option<(f64, f64)> {
    match spec.kind {
        PotentialKind::QuarticDoubleWell { omega_r, x0 } => {
            let x = x0 * (1.0 + damping.product() / (2.0 * omega_r * omega_r)).sqrt();
            Some((-x, x))
        }
        _ => None,
    }
}

/// `V_F(0) - V_F(x_min)`.
pub fn barrier_height(spec: &PotentialSpec, damping: &DampingParams) -> Option<f64> {
    well_minima(spec, damping).map(|(_, x)| v_full(0.0, spec, damping) - v_full(x, spec, damping))
}

/// Harmonic frequency of one well of `V_R`: `V_R''(±x0) = 4 M ω_R²`, so
/// `ω_loc = 2 ω_R`.
pub fn local_well_frequency(spec: &PotentialSpec) -> Option<f64> {
    match spec.kind {
        PotentialKind::QuarticDoubleWell { omega_r, .. } => Some(2.0 * omega_r),
        _ => None,
    }
}

/// `V_F` sampled once per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    values: Vec<f64>,
}

impl PotentialProfile {
    pub fn sample(grid: &SpatialGrid, spec: &PotentialSpec, damping: &DampingParams) -> Self {
        Self {
            values: grid.points().iter().map(|&x| v_full(x, spec, damping)).collect(),
        }
    }

    pub fn zero(grid: &SpatialGrid) -> Self {
        Self {
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max V - min V` over the grid.
    pub fn span(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const M: f64 = 104.39;

    fn fig1() -> (PotentialSpec, DampingParams) {
        (PotentialSpec::quartic(0.025, 2.5, M), DampingParams::new(2.5e-4, 1.0))
    }

    #[test]
    fn renormalized_vanishes_at_well_bottoms() {
        let (spec, _) = fig1();
        assert_eq!(v_renormalized(2.5, &spec), 0.0);
        assert_eq!(v_renormalized(-2.5, &spec), 0.0);
    }

    #[test]
    fn renormalized_barrier_top() {
        let (spec, _) = fig1();
        // M ω² x0² / 2 by direct substitution
        let oracle = M * 0.025 * 0.025 * 2.5 * 2.5 / 2.0;
        assert!((v_renormalized(0.0, &spec) - oracle).abs() < 1e-15);
        assert!((v_renormalized(0.0, &spec) - 0.2039).abs() < 5e-5);
    }

    #[test]
    fn damping_examples() {
        let d = DampingParams::new(2.5e-4, 1.0);
        assert_eq!(v_damping(0.0, M, &d), 0.0);
        assert_eq!(v_damping(3.7, M, &DampingParams::undamped(2.5e-4)), 0.0);
        assert!((v_damping(2.5, M, &d) - (-0.0816)).abs() < 1e-4);
    }

    #[test]
    fn full_potential_examples() {
        let (spec, d) = fig1();
        let v0 = v_full(0.0, &spec, &d);
        assert!((v0 - 0.2039).abs() < 5e-5);
        assert!(v0 > v_full(2.5, &spec, &d));
        assert!(v0 > v_full(-2.5, &spec, &d));

        let free = PotentialSpec::free(M);
        let v = v_full(1.0, &free, &d);
        assert!((v - (-0.5 * 104.39 * 2.5e-4)).abs() < 1e-15);
        assert!((v - (-0.01305)).abs() < 1e-5);
    }

    /// Bisection on the analytic gradient, bracketing the positive minimum.
    fn numeric_minimum(spec: &PotentialSpec, d: &DampingParams) -> f64 {
        let (mut lo, mut hi) = (1e-6, 100.0);
        assert!(v_full_gradient(lo, spec, d) < 0.0 && v_full_gradient(hi, spec, d) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if v_full_gradient(mid, spec, d) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn well_minima_examples() {
        let spec = PotentialSpec::quartic(0.025, 2.5, M);
        assert_eq!(well_minima(&spec, &DampingParams::undamped(2.5e-4)), Some((-2.5, 2.5)));

        let d = DampingParams::new(2.5e-4, 1.0);
        let (l, r) = well_minima(&spec, &d).unwrap();
        assert_eq!(l, -r);
        assert!((r - 2.7386).abs() < 1e-4);
        assert!((r - numeric_minimum(&spec, &d)).abs() < 1e-10);

        let transfer = PotentialSpec::quartic(0.005, 2.5, M);
        let (_, r) = well_minima(&transfer, &d).unwrap();
        assert!((r - 6.1237).abs() < 1e-4);
        assert!((r - numeric_minimum(&transfer, &d)).abs() < 1e-10);
    }

    #[test]
    fn well_minima_zero_the_finite_difference_gradient() {
        let (spec, d) = fig1();
        let (_, x) = well_minima(&spec, &d).unwrap();
        let eps = 1e-5;
        let fd = (v_full(x + eps, &spec, &d) - v_full(x - eps, &spec, &d)) / (2.0 * eps);
        assert!(fd.abs() < 1e-10, "fd gradient {fd}");
    }

    #[test]
    fn damping_deepens_and_widens_wells() {
        let (spec, d) = fig1();
        let (_, xm) = well_minima(&spec, &d).unwrap();
        assert!(xm > 2.5);
        assert!(v_full(xm, &spec, &d) < v_full(2.5, &spec, &d));
        assert!(v_full(2.5, &spec, &d) <= v_full(0.0, &spec, &d));
        assert!(barrier_height(&spec, &d).unwrap() > barrier_height(&spec, &DampingParams::undamped(2.5e-4)).unwrap());
    }

    #[test]
    fn reference_gradient_is_damping_slope_at_reference_point() {
        // V_R' vanishes at x0 = 2.5, so only V_D' = -M γ μ x survives.
        let g = reference_gradient(M);
        assert!((g - M * 2.5e-4 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn local_frequency_matches_curvature() {
        let (spec, _) = fig1();
        let h = 1e-4;
        let curv = (v_renormalized(2.5 + h, &spec) - 2.0 * v_renormalized(2.5, &spec)
            + v_renormalized(2.5 - h, &spec))
            / (h * h);
        let w = local_well_frequency(&spec).unwrap();
        assert!((curv - M * w * w).abs() < 1e-6 * curv);
    }

    proptest! {
        #[test]
        fn renormalized_is_even(x in -20.0..20.0f64, w in 0.001..0.1f64, x0 in 0.5..5.0f64) {
            let spec = PotentialSpec::quartic(w, x0, M);
            prop_assert_eq!(v_renormalized(x, &spec), v_renormalized(-x, &spec));
        }

        #[test]
        fn undamped_full_equals_renormalized(x in -20.0..20.0f64, gamma in 0.0..1e-2f64) {
            let (spec, _) = fig1();
            prop_assert_eq!(v_full(x, &spec, &DampingParams::undamped(gamma)), v_renormalized(x, &spec));
        }

        #[test]
        fn linear_variant_is_exactly_linear(x in -10.0..10.0f64, g in 0.0..4.0f64) {
            let spec = PotentialSpec::linear(g, M);
            let d = DampingParams::undamped(2.5e-4);
            let slope = g * reference_gradient(M);
            prop_assert!(((v_full(x, &spec, &d) - v_full(0.0, &spec, &d)) - slope * x).abs() <= 1e-15 * (1.0 + (slope * x).abs()));
        }
    }
}
