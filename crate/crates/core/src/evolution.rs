//! Master-equation right-hand side and the explicit fourth-order stepper.
//!
//! ```text
//! ∂ρ̃/∂t = (iħ/2M)(∂²_x − ∂²_y)ρ̃ − (i/ħ)(V_F(x) − V_F(y))ρ̃
//!         − γ(x − y)(∂_x − ∂_y)ρ̃ − (2MγkT/ħ²)(x − y)²ρ̃
//! ```
//!
//! Derivatives are 3-point central differences; `ρ̃` vanishes on and beyond
//! the outermost ring of nodes. Output row `i` depends only on input rows
//! `i − 1, i, i + 1`, so rows are computed in parallel.

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{trace, DensityField, GridError, SpatialGrid};
use crate::potentials::{DampingParams, PotentialProfile, PotentialSpec};

/// Largest tolerated change of the trace across one step.
pub const MAX_STEP_TRACE_DRIFT: f64 = 1e-4;

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("non-finite value at step {step}, node ({i}, {j}), from the {term} term")]
    NonFinite {
        step: usize,
        i: usize,
        j: usize,
        term: &'static str,
    },
    #[error("trace drifted by {drift:e} in step {step} (dt = {dt} fs); reduce dt")]
    Unstable { step: usize, dt: f64, drift: f64 },
    #[error("invalid stepper configuration: {0}")]
    Config(String),
    #[error("observer aborted the run at t = {t} fs: {source}")]
    Observer {
        t: f64,
        #[source]
        source: BoxError,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Physical constants and couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    /// eV·fs
    pub hbar: f64,
    /// eV·fs²/Å²
    pub mass: f64,
    /// Relaxation rate, fs⁻¹.
    pub gamma: f64,
    /// Bath-oscillator damping rate, fs⁻¹.
    pub mu: f64,
    /// Thermal energy, eV.
    pub kt: f64,
}

impl EvolutionParams {
    pub fn damping(&self) -> DampingParams {
        DampingParams::new(self.gamma, self.mu)
    }

    /// `2MγkT/ħ²` in fs⁻¹Å⁻².
    pub fn decoherence_coefficient(&self) -> f64 {
        2.0 * self.mass * self.gamma * self.kt / (self.hbar * self.hbar)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [("hbar", self.hbar), ("M", self.mass), ("kT", self.kt)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [("γ", self.gamma), ("μ", self.mu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be ≥ 0, got {v}"));
            }
        }
        Ok(())
    }
}

/// The discretized generator on a fixed grid with a fixed potential.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    n: usize,
    spacing: f64,
    x: Vec<f64>,
    /// `V_F / ħ` per node.
    phase: Vec<f64>,
    kinetic: f64,
    gamma: f64,
    dissipation: f64,
    decoherence: f64,
}

impl MasterEquation {
    pub fn new(grid: &SpatialGrid, params: &EvolutionParams, potential: &PotentialSpec) -> Self {
        let profile = PotentialProfile::sample(grid, potential, &params.damping());
        Self::with_profile(grid, params, &profile)
    }

    pub fn with_profile(grid: &SpatialGrid, params: &EvolutionParams, profile: &PotentialProfile) -> Self {
        let h = grid.spacing();
        Self {
            n: grid.n_points(),
            spacing: h,
            x: grid.points().to_vec(),
            phase: profile.values().iter().map(|v| v / params.hbar).collect(),
            kinetic: params.hbar / (2.0 * params.mass * h * h),
            gamma: params.gamma,
            dissipation: params.gamma / (2.0 * h),
            decoherence: params.decoherence_coefficient(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Writes `∂ρ̃/∂t` into `out`. Boundary rows and columns of `out` are 0.
    pub fn rhs_into(&self, rho: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        let n = self.n;
        debug_assert_eq!(rho.dim(), (n, n));
        debug_assert_eq!(out.dim(), (n, n));
        let zero = Complex64::new(0.0, 0.0);
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                let row = row.as_slice_mut().expect("standard layout");
                if i == 0 || i == n - 1 {
                    row.fill(zero);
                    return;
                }
                let dn = rho.row(i - 1);
                let cur = rho.row(i);
                let up = rho.row(i + 1);
                let (dn, cur, up) = (
                    dn.as_slice().expect("standard layout"),
                    cur.as_slice().expect("standard layout"),
                    up.as_slice().expect("standard layout"),
                );
                self.rhs_row(i, dn, cur, up, row);
            });
    }

    #[inline]
    fn rhs_row(&self, i: usize, dn: &[Complex64], cur: &[Complex64], up: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        out[0] = zero;
        out[n - 1] = zero;
        let xi = self.x[i];
        let vi = self.phase[i];
        for j in 1..n - 1 {
            let q = xi - self.x[j];
            let c = cur[j];
            // (∂²_x − ∂²_y)ρ̃·h²; the −2ρ̃ centre terms cancel
            let lap = up[j] + dn[j] - cur[j + 1] - cur[j - 1];
            // (∂_x − ∂_y)ρ̃·2h
            let grad = (up[j] - dn[j]) - (cur[j + 1] - cur[j - 1]);
            let unitary = lap * self.kinetic - c * (vi - self.phase[j]);
            out[j] = Complex64::new(-unitary.im, unitary.re)
                - grad * (self.dissipation * q)
                - c * (self.decoherence * q * q);
        }
    }

    pub fn rhs(&self, field: &DensityField) -> Result<DensityField, EvolutionError> {
        let mut out = Array2::zeros((self.n, self.n));
        self.rhs_into(field.values(), &mut out);
        if let Some((i, j)) = first_non_finite(&out) {
            return Err(EvolutionError::NonFinite {
                step: 0,
                i,
                j,
                term: self.blame(field.values(), i, j),
            });
        }
        Ok(DensityField::from_values(field.grid(), out)?)
    }

    /// Names the first term that evaluates to a non-finite value at `(i, j)`.
    fn blame(&self, rho: &Array2<Complex64>, i: usize, j: usize) -> &'static str {
        let n = self.n;
        let at = |a: usize, b: usize| {
            if a == 0 || b == 0 || a >= n - 1 || b >= n - 1 {
                Complex64::new(0.0, 0.0)
            } else {
                rho[[a, b]]
            }
        };
        let c = at(i, j);
        if !(c.re.is_finite() && c.im.is_finite()) {
            return "state";
        }
        let q = self.x[i] - self.x[j];
        let lap = (at(i + 1, j) + at(i - 1, j) - at(i, j + 1) - at(i, j - 1)) * self.kinetic;
        let pot = c * (self.phase[i] - self.phase[j]);
        let grad = ((at(i + 1, j) - at(i - 1, j)) - (at(i, j + 1) - at(i, j - 1))) * (self.dissipation * q);
        let dec = c * (self.decoherence * q * q);
        [("kinetic", lap), ("potential", pot), ("dissipation", grad), ("decoherence", dec)]
            .into_iter()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
            .map(|(name, _)| name)
            .unwrap_or("combined")
    }

    /// Gershgorin bound on the spectral radius of the discrete generator.
    pub fn spectral_radius_bound(&self) -> f64 {
        let (vmin, vmax) = self
            .phase
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let qmax = 2.0 * self.x[self.n - 1];
        4.0 * self.kinetic + (vmax - vmin) + 4.0 * self.dissipation * qmax + self.decoherence * qmax * qmax
    }

    /// Time step `safety · 2 / bound`, well inside the stability region of
    /// the four-stage scheme.
    pub fn suggested_dt(&self, safety: f64) -> f64 {
        safety * 2.0 / self.spectral_radius_bound()
    }
}

fn first_non_finite(a: &Array2<Complex64>) -> Option<(usize, usize)> {
    a.indexed_iter()
        .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        .map(|(idx, _)| idx)
}

/// Reusable work buffers for the four-stage explicit scheme of order 4.
#[derive(Debug, Clone)]
pub struct Rk4Stepper {
    k: Array2<Complex64>,
    stage: Array2<Complex64>,
    acc: Array2<Complex64>,
}

impl Rk4Stepper {
    pub fn new(n: usize) -> Self {
        Self {
            k: Array2::zeros((n, n)),
            stage: Array2::zeros((n, n)),
            acc: Array2::zeros((n, n)),
        }
    }

    /// Advances `rho` in place by `dt`.
    pub fn advance(&mut self, eq: &MasterEquation, rho: &mut Array2<Complex64>, dt: f64) {
        if dt == 0.0 {
            return;
        }
        let Self { k, stage, acc } = self;
        eq.rhs_into(rho, k);
        Zip::from(&mut *acc)
            .and(&mut *stage)
            .and(&*rho)
            .and(&*k)
            .par_for_each(|a, s, &r, &k| {
                *a = r + k * (dt / 6.0);
                *s = r + k * (0.5 * dt);
            });
        for (weight, shift) in [(dt / 3.0, 0.5 * dt), (dt / 3.0, dt)] {
            eq.rhs_into(stage, k);
            Zip::from(&mut *acc)
                .and(&mut *stage)
                .and(&*rho)
                .and(&*k)
                .par_for_each(|a, s, &r, &k| {
                    *a += k * weight;
                    *s = r + k * shift;
                });
        }
        eq.rhs_into(stage, k);
        Zip::from(&mut *rho)
            .and(&*acc)
            .and(&*k)
            .par_for_each(|r, &a, &k| *r = a + k * (dt / 6.0));
    }
}

/// One step of the explicit scheme, with stability and finiteness checks.
pub fn step(
    field: &DensityField,
    dt: f64,
    params: &EvolutionParams,
    potential: &PotentialSpec,
) -> Result<DensityField, EvolutionError> {
    let eq = MasterEquation::new(field.grid(), params, potential);
    let mut next = field.clone();
    let mut stepper = Rk4Stepper::new(eq.n_points());
    let mut monitor = StepMonitor::new(field, params.gamma, dt)?;
    stepper.advance(&eq, next.values_mut(), dt);
    monitor.check(&eq, field, &next, 1, dt)?;
    Ok(next)
}

fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Per-step bookkeeping for the instability monitors.
#[derive(Debug, Clone, Copy)]
struct StepMonitor {
    trace: f64,
    norm: f64,
    /// Allowed Frobenius-norm growth per step: the dissipator can raise it
    /// at rate ≤ γ, everything else conserves or shrinks it.
    max_growth: f64,
}

impl StepMonitor {
    fn new(field: &DensityField, gamma: f64, dt: f64) -> Result<Self, EvolutionError> {
        Ok(Self {
            trace: trace(field)?,
            norm: frobenius(field.values()),
            max_growth: 1.0 + 2.0 * gamma * dt + 1e-6,
        })
    }

    fn check(
        &mut self,
        eq: &MasterEquation,
        prev: &DensityField,
        next: &DensityField,
        step: usize,
        dt: f64,
    ) -> Result<(), EvolutionError> {
        if let Some((i, j)) = first_non_finite(next.values()) {
            return Err(EvolutionError::NonFinite {
                step,
                i,
                j,
                term: eq.blame(prev.values(), i, j),
            });
        }
        let after = match trace(next) {
            Ok(t) => t,
            Err(GridError::ImaginaryDiagonal(drift)) => {
                return Err(EvolutionError::Unstable { step, dt, drift })
            }
            Err(e) => return Err(e.into()),
        };
        let drift = (after - self.trace).abs();
        let norm = frobenius(next.values());
        if drift > MAX_STEP_TRACE_DRIFT || norm > self.norm * self.max_growth {
            return Err(EvolutionError::Unstable { step, dt, drift });
        }
        self.trace = after;
        self.norm = norm;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// fs
    pub dt: f64,
    /// fs
    pub t_end: f64,
    /// Observer cadence in steps.
    pub record_every: usize,
}

impl StepperConfig {
    /// Picks the largest `dt ≤ dt_max` that divides `record_interval`
    /// evenly, and a step count that lands on `t_end`.
    pub fn with_cadence(t_end: f64, record_interval: f64, dt_max: f64) -> Result<Self, EvolutionError> {
        if !(record_interval > 0.0 && dt_max > 0.0 && t_end >= 0.0) {
            return Err(EvolutionError::Config(format!(
                "need t_end ≥ 0, record interval > 0, dt > 0 (got {t_end}, {record_interval}, {dt_max})"
            )));
        }
        let record_every = (record_interval / dt_max).ceil().max(1.0) as usize;
        let dt = record_interval / record_every as f64;
        let cfg = Self {
            dt,
            t_end,
            record_every,
        };
        cfg.n_steps()?;
        Ok(cfg)
    }

    pub fn n_steps(&self) -> Result<usize, EvolutionError> {
        if self.t_end == 0.0 {
            return Ok(0);
        }
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.record_every > 0) {
            return Err(EvolutionError::Config(format!(
                "dt and t_end must be positive and record_every ≥ 1 (got {self:?})"
            )));
        }
        let steps = (self.t_end / self.dt).round();
        if steps > 1e9 || ((steps * self.dt) - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(EvolutionError::Config(format!(
                "t_end = {} is not an integer number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Steps from `t = 0` to `cfg.t_end`, calling `observer(t, field)` at
/// `t = 0` and then every `cfg.record_every` steps (and at the final step).
pub fn evolve<F>(
    initial: &DensityField,
    cfg: &StepperConfig,
    params: &EvolutionParams,
    potential: &PotentialSpec,
    observer: F,
) -> Result<DensityField, EvolutionError>
where
    F: FnMut(f64, &DensityField) -> Result<(), BoxError>,
{
    let eq = MasterEquation::new(initial.grid(), params, potential);
    evolve_with(&eq, initial, cfg, observer)
}

/// [`evolve`] with a prebuilt generator.
pub fn evolve_with<F>(
    eq: &MasterEquation,
    initial: &DensityField,
    cfg: &StepperConfig,
    mut observer: F,
) -> Result<DensityField, EvolutionError>
where
    F: FnMut(f64, &DensityField) -> Result<(), BoxError>,
{
    let n_steps = cfg.n_steps()?;
    let mut field = initial.clone();
    let mut prev = initial.clone();
    let mut stepper = Rk4Stepper::new(eq.n_points());
    let mut monitor = StepMonitor::new(&field, eq.gamma, cfg.dt)?;
    observer(0.0, &field).map_err(|source| EvolutionError::Observer { t: 0.0, source })?;
    for s in 1..=n_steps {
        prev.values_mut().assign(field.values());
        stepper.advance(eq, field.values_mut(), cfg.dt);
        monitor.check(eq, &prev, &field, s, cfg.dt)?;
        if s % cfg.record_every == 0 || s == n_steps {
            let t = s as f64 * cfg.dt;
            observer(t, &field).map_err(|source| EvolutionError::Observer { t, source })?;
        }
    }
    Ok(field)
}

/// Outcome of the startup stability probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityProbe {
    /// Accepted step, fs.
    pub dt: f64,
    /// `dt · ħ / (M h²)`.
    pub c_stab: f64,
    /// Frobenius-norm growth factor of a random state over the probe.
    pub growth: f64,
    /// Largest growth the physical dissipator allows over the probe.
    pub allowed_growth: f64,
    pub halvings: u32,
}

pub const PROBE_STEPS: usize = 100;

/// Runs [`PROBE_STEPS`] steps on a seeded random Hermitian field and halves
/// `dt` until no mode grows faster than the dissipator permits.
pub fn probe_stability(
    eq: &MasterEquation,
    params: &EvolutionParams,
    dt_start: f64,
) -> Result<StabilityProbe, EvolutionError> {
    let n = eq.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut base: Array2<Complex64> = Array2::zeros((n, n));
    for i in 1..n - 1 {
        for j in i..n - 1 {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            base[[i, j]] = z;
            base[[j, i]] = z.conj();
        }
        base[[i, i]].im = 0.0;
    }
    let norm = frobenius;
    let n0 = norm(&base);
    let mut stepper = Rk4Stepper::new(n);
    let mut dt = dt_start;
    for halvings in 0..12 {
        let mut rho = base.clone();
        for _ in 0..PROBE_STEPS {
            stepper.advance(eq, &mut rho, dt);
        }
        let growth = norm(&rho) / n0;
        // the dissipator alone can raise the Frobenius norm at rate ≤ γ
        let allowed_growth = (2.0 * params.gamma * dt * PROBE_STEPS as f64).exp() * (1.0 + 1e-9);
        if growth.is_finite() && growth <= allowed_growth {
            return Ok(StabilityProbe {
                dt,
                c_stab: dt * params.hbar / (params.mass * eq.spacing() * eq.spacing()),
                growth,
                allowed_growth,
                halvings,
            });
        }
        dt *= 0.5;
    }
    Err(EvolutionError::Config(format!(
        "no stable time step found below {dt_start} fs"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::hermiticity_defect;
    use crate::states::{double_gaussian, gaussian_pure, GaussianSpec};
    use crate::units::{proton_like_mass, HBAR, KT_ROOM};

    fn params(gamma: f64, mu: f64) -> EvolutionParams {
        EvolutionParams {
            hbar: HBAR,
            mass: proton_like_mass(),
            gamma,
            mu,
            kt: KT_ROOM,
        }
    }

    fn setup() -> (SpatialGrid, DensityField, PotentialSpec) {
        let g = SpatialGrid::new(8.0, 129).unwrap();
        let f = double_gaussian(2.5, 0.5, &g).unwrap();
        (g, f, PotentialSpec::quartic(0.025, 2.5, proton_like_mass()))
    }

    #[test]
    fn rhs_preserves_hermiticity_and_trace() {
        let (g, f, pot) = setup();
        let eq = MasterEquation::new(&g, &params(2.5e-4, 1.0), &pot);
        let d = eq.rhs(&f).unwrap();
        assert!(hermiticity_defect(&d) <= 1e-12 * d.max_abs());
        let tr = trace(&d).unwrap();
        assert!(tr.abs() < 1e-10, "d trace / dt = {tr}");
    }

    #[test]
    fn rhs_boundary_is_zero() {
        let (g, f, pot) = setup();
        let d = MasterEquation::new(&g, &params(2.5e-4, 1.0), &pot).rhs(&f).unwrap();
        let n = g.n_points();
        for k in 0..n {
            for z in [d.values()[[0, k]], d.values()[[n - 1, k]], d.values()[[k, 0]], d.values()[[k, n - 1]]] {
                assert_eq!(z, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn zero_dt_is_identity() {
        let (_, f, pot) = setup();
        let next = step(&f, 0.0, &params(2.5e-4, 1.0), &pot).unwrap();
        assert_eq!(next, f);
    }

    #[test]
    fn one_step_conserves_trace() {
        let (_, f, pot) = setup();
        let next = step(&f, 0.02, &params(2.5e-4, 1.0), &pot).unwrap();
        assert!((trace(&next).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn huge_step_is_reported_unstable() {
        let (_, f, pot) = setup();
        let err = step(&f, 50.0, &params(2.5e-4, 1.0), &pot).unwrap_err();
        assert!(matches!(err, EvolutionError::Unstable { .. } | EvolutionError::NonFinite { .. }));
        assert!(err.to_string().contains("reduce dt") || err.to_string().contains("non-finite"));
    }

    #[test]
    fn non_finite_state_is_blamed() {
        let (g, mut f, pot) = setup();
        f.values_mut()[[40, 50]] = Complex64::new(f64::NAN, 0.0);
        let eq = MasterEquation::new(&g, &params(2.5e-4, 1.0), &pot);
        match eq.rhs(&f) {
            Err(EvolutionError::NonFinite { term, .. }) => assert!(!term.is_empty()),
            other => panic!("expected NonFinite, got {other:?}"),
        }
        let eq = MasterEquation::with_profile(
            &g,
            &params(2.5e-4, 1.0),
            &PotentialProfile::from_values(vec![f64::INFINITY; g.n_points()]),
        );
        let (_, f, _) = setup();
        match eq.rhs(&f) {
            Err(EvolutionError::NonFinite { term, .. }) => assert_eq!(term, "potential"),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn zero_steps_return_initial() {
        let (_, f, pot) = setup();
        let cfg = StepperConfig { dt: 0.01, t_end: 0.0, record_every: 1 };
        let mut calls = 0;
        let out = evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |_, _| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(out, f);
        assert_eq!(calls, 1);
    }

    #[test]
    fn observer_cadence_and_abort() {
        let (_, f, pot) = setup();
        let cfg = StepperConfig::with_cadence(1.0, 0.25, 0.02).unwrap();
        let mut times = Vec::new();
        evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 5);
        assert!((times[4] - 1.0).abs() < 1e-12);

        let err = evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |t, _| {
            if t > 0.3 {
                Err("stop".into())
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, EvolutionError::Observer { .. }));
    }

    #[test]
    fn damping_changes_the_evolution() {
        let (_, f, pot) = setup();
        let cfg = StepperConfig::with_cadence(1.0, 1.0, 0.02).unwrap();
        let a = evolve(&f, &cfg, &params(2.5e-4, 0.0), &pot, |_, _| Ok(())).unwrap();
        let b = evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |_, _| Ok(())).unwrap();
        let diff = (a.values() - b.values()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        assert!(diff > 0.0);
    }

    #[test]
    fn evolution_is_deterministic() {
        let g = SpatialGrid::new(8.0, 65).unwrap();
        let f = gaussian_pure(&GaussianSpec::new(1.0, 0.6), &g).unwrap();
        let pot = PotentialSpec::quartic(0.025, 2.5, proton_like_mass());
        let cfg = StepperConfig::with_cadence(0.5, 0.5, 0.05).unwrap();
        let a = evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |_, _| Ok(())).unwrap();
        let b = evolve(&f, &cfg, &params(2.5e-4, 1.0), &pot, |_, _| Ok(())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn probe_accepts_suggested_step() {
        let (g, _, pot) = setup();
        let p = params(2.5e-4, 1.0);
        let eq = MasterEquation::new(&g, &p, &pot);
        let dt = eq.suggested_dt(1.0);
        let probe = probe_stability(&eq, &p, dt).unwrap();
        assert!(probe.dt <= dt);
        assert!(probe.growth <= probe.allowed_growth);
        // an obviously unstable start gets halved down
        let probe = probe_stability(&eq, &p, 8.0 * dt).unwrap();
        assert!(probe.halvings >= 1);
    }

    #[test]
    fn cadence_rejects_bad_inputs() {
        assert!(StepperConfig::with_cadence(1.0, 0.0, 0.1).is_err());
        assert!(StepperConfig::with_cadence(1.0, 0.5, -0.1).is_err());
        let cfg = StepperConfig { dt: 0.3, t_end: 1.0, record_every: 1 };
        assert!(cfg.n_steps().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(params(2.5e-4, 1.0).validate().is_ok());
        assert!(params(-1.0, 1.0).validate().is_err());
        let mut p = params(0.0, 0.0);
        assert!(p.validate().is_ok());
        p.kt = 0.0;
        assert!(p.validate().is_err());
    }
}
