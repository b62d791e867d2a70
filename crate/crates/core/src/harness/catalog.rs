//! The experiment catalog and its resolution into concrete runs.

use serde::Serialize;

use super::config::{ConfigError, Overrides, SweepParam};
use crate::evolution::EvolutionParams;
use crate::potentials::{reference, well_minima, DampingParams, PotentialSpec};
use crate::states::{ground_state_width, GaussianSpec};
use crate::units::{mass_from_mev, HBAR, KT_ROOM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialTemplate {
    QuarticDoubleWell,
    /// Linear ramp `g · G_ref · x`; `g` is the sweep value.
    Linear,
    /// `V_R = 0`, `V_D` retained.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialRecipe {
    /// Symmetric superposition with peaks at `±x0`.
    DoubleGaussianAtWells,
    /// One packet at the right minimum of `V_F` of the run.
    GaussianAtRightMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// `C_R = C / C(μ = 0)`.
    RelativeCoherence,
    /// `C_g = C(g) / C(g = 1)`.
    SlopeRatio,
    /// `P(t)`, left-well population.
    TransferProbability,
    /// Absolute `C(t)`.
    Coherence,
}

impl Measurement {
    pub fn label(self) -> &'static str {
        match self {
            Measurement::RelativeCoherence => "C_R",
            Measurement::SlopeRatio => "C_g",
            Measurement::TransferProbability => "P_left",
            Measurement::Coherence => "C",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub potential: PotentialTemplate,
    pub omega_r: f64,
    pub x0: f64,
    pub mass_mev: f64,
    pub initial: InitialRecipe,
    /// `None` means the local ground-state width of a `V_R` well.
    pub sigma: Option<f64>,
    /// Fixed couplings; the swept one is overwritten per run.
    pub params: EvolutionParams,
    /// Base couplings of the `γ = γ₀/a, μ = μ₀a` rescaling.
    pub gamma0: f64,
    pub mu0: f64,
    pub sweep: SweepParam,
    pub sweep_values: Vec<f64>,
    pub half_width: f64,
    pub grid_points: usize,
    pub t_end: f64,
    pub record_interval: f64,
    /// Upper bound on the time step; `None` lets the stability probe decide.
    pub dt_max: Option<f64>,
    pub workers: usize,
    pub measurement: Measurement,
    pub observables: Vec<&'static str>,
    /// Defaults that are modelling choices rather than fixed inputs.
    pub artifact_choices: Vec<&'static str>,
}

pub const DEFAULT_GRID_POINTS: usize = 257;
pub const DECOHERENCE_HALF_WIDTH: f64 = 8.0;
pub const TRANSFER_HALF_WIDTH: f64 = 14.0;
pub const SLOPE_HALF_WIDTH: f64 = 10.0;
pub const SLOPE_GRID_POINTS: usize = 321;

const FIG1_OMEGA_R: f64 = reference::OMEGA_R;
const TRANSFER_OMEGA_R: f64 = 0.005;
const X0: f64 = reference::X0;
const MASS_MEV: f64 = 938.0;
const GAMMA: f64 = reference::GAMMA;

fn base(name: &'static str, summary: &'static str) -> Scenario {
    Scenario {
        name,
        summary,
        potential: PotentialTemplate::QuarticDoubleWell,
        omega_r: FIG1_OMEGA_R,
        x0: X0,
        mass_mev: MASS_MEV,
        initial: InitialRecipe::DoubleGaussianAtWells,
        sigma: None,
        params: EvolutionParams {
            hbar: HBAR,
            mass: mass_from_mev(MASS_MEV),
            gamma: GAMMA,
            mu: reference::MU,
            kt: KT_ROOM,
        },
        gamma0: GAMMA,
        mu0: reference::MU,
        sweep: SweepParam::Mu,
        sweep_values: vec![],
        half_width: DECOHERENCE_HALF_WIDTH,
        grid_points: DEFAULT_GRID_POINTS,
        t_end: 50.0,
        record_interval: 0.5,
        dt_max: None,
        workers: 1,
        measurement: Measurement::RelativeCoherence,
        observables: vec!["C", "C_R", "trace", "purity"],
        artifact_choices: vec![
            "kT = 0.0259 eV (300 K)",
            "σ = sqrt(ħ / 2M·2ω_R), ground state of one V_R well",
            "sweep values",
            "grid size and half width",
            "record cadence",
        ],
    }
}

/// All scenarios with their defaults.
pub fn catalog() -> Vec<Scenario> {
    let transfer = |name, summary, sweep, values: Vec<f64>, mu| Scenario {
        omega_r: TRANSFER_OMEGA_R,
        initial: InitialRecipe::GaussianAtRightMinimum,
        sweep,
        sweep_values: values,
        half_width: TRANSFER_HALF_WIDTH,
        t_end: 1000.0,
        record_interval: 5.0,
        measurement: Measurement::TransferProbability,
        observables: vec!["P_left", "trace", "purity"],
        params: EvolutionParams {
            mu,
            ..base("", "").params
        },
        ..base(name, summary)
    };
    vec![
        Scenario {
            sweep: SweepParam::Mu,
            sweep_values: vec![0.1, 0.5, 1.0],
            ..base(
                "decoherence-mu",
                "relative coherence of a double Gaussian for several μ at fixed γ",
            )
        },
        Scenario {
            potential: PotentialTemplate::Linear,
            // the ramp drags the packets towards -L; same spacing as L = 8
            half_width: SLOPE_HALF_WIDTH,
            grid_points: SLOPE_GRID_POINTS,
            sweep: SweepParam::SlopeFactor,
            sweep_values: vec![0.5, 1.0, 2.0],
            measurement: Measurement::SlopeRatio,
            observables: vec!["C", "C_g", "trace", "purity"],
            params: EvolutionParams {
                mu: 0.0,
                ..base("", "").params
            },
            ..base(
                "decoherence-slope",
                "undamped environment on linear ramps of slope g, relative to g = 1",
            )
        },
        Scenario {
            sweep: SweepParam::Gamma,
            sweep_values: vec![1.25e-4, 2.5e-4, 5e-4],
            ..base(
                "decoherence-gamma",
                "relative coherence of a double Gaussian for several γ at μ = 1 fs⁻¹",
            )
        },
        transfer(
            "transfer-mu",
            "left-well population for several μ at fixed γ, with a γ = 0 baseline",
            SweepParam::Mu,
            vec![0.0, 0.01, 0.1, 0.5],
            reference::MU,
        ),
        transfer(
            "transfer-gamma-weak",
            "left-well population for several γ at μ = 0.01 fs⁻¹",
            SweepParam::Gamma,
            vec![1.25e-4, 2.5e-4, 5e-4],
            0.01,
        ),
        transfer(
            "transfer-gamma-strong",
            "left-well population for several γ at μ = 1 fs⁻¹",
            SweepParam::Gamma,
            vec![1.25e-4, 2.5e-4, 5e-4],
            1.0,
        ),
        Scenario {
            potential: PotentialTemplate::Free,
            sweep: SweepParam::Rescale,
            sweep_values: vec![0.5, 1.0, 2.0, 4.0],
            measurement: Measurement::Coherence,
            observables: vec!["C", "trace", "purity"],
            t_end: 30.0,
            ..base(
                "rescaled-free",
                "free particle with V_D under γ = γ₀/a, μ = μ₀a; absolute coherence",
            )
        },
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    catalog().into_iter().find(|s| s.name == name)
}

/// Resolved initial state of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    DoubleGaussian { center: f64, width: f64 },
    Gaussian(GaussianSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunRole {
    Sweep(f64),
    /// `μ = 0` twin of a damped run.
    UndampedTwin,
    /// `γ = 0`: unitary evolution only.
    VonNeumann,
    /// `g = 1` reference ramp.
    ReferenceSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    /// Unique within a scenario, e.g. `mu=0.5` or `gamma=0.00025,mu=0`.
    pub tag: String,
    pub role: RunRole,
    pub params: EvolutionParams,
    pub potential: PotentialSpec,
    pub initial: InitialState,
}

impl Scenario {
    /// Applies overrides, rejecting keys the scenario does not use.
    pub fn with_overrides(&self, o: &Overrides) -> Result<Scenario, ConfigError> {
        let mut s = self.clone();
        let na = |key: &str| ConfigError::NotApplicable {
            key: key.to_string(),
            scenario: self.name.to_string(),
        };
        let rescaled = self.sweep == SweepParam::Rescale;
        if let Some(v) = o.kt {
            s.params.kt = v;
        }
        if let Some(v) = o.gamma {
            if self.sweep == SweepParam::Gamma || rescaled {
                return Err(na("gamma"));
            }
            s.params.gamma = v;
        }
        if let Some(v) = o.mu {
            if self.sweep == SweepParam::Mu || rescaled || self.potential == PotentialTemplate::Linear {
                return Err(na("mu"));
            }
            s.params.mu = v;
        }
        if let Some(v) = o.omega_r {
            if self.potential != PotentialTemplate::QuarticDoubleWell {
                return Err(na("omega_R"));
            }
            s.omega_r = v;
        }
        if let Some(v) = o.x0 {
            s.x0 = v;
        }
        if let Some(v) = o.sigma {
            s.sigma = Some(v);
        }
        if let Some(v) = o.mass_mev {
            s.mass_mev = v;
            s.params.mass = mass_from_mev(v);
        }
        if o.gamma0.is_some() || o.mu0.is_some() {
            if !rescaled {
                return Err(na(if o.gamma0.is_some() { "gamma0" } else { "mu0" }));
            }
            s.gamma0 = o.gamma0.unwrap_or(s.gamma0);
            s.mu0 = o.mu0.unwrap_or(s.mu0);
        }
        if let Some(v) = o.t_end {
            s.t_end = v;
        }
        if let Some(v) = o.record_interval {
            s.record_interval = v;
        }
        if let Some(v) = o.dt {
            s.dt_max = Some(v);
        }
        if let Some(v) = o.grid_points {
            s.grid_points = v;
        }
        if let Some(v) = o.half_width {
            s.half_width = v;
        }
        if let Some(v) = o.workers {
            s.workers = v;
        }
        if let Some((param, values)) = &o.sweep {
            if *param != self.sweep {
                return Err(na(param.list_key()));
            }
            s.sweep_values = values.clone();
        }
        Ok(s)
    }

    fn mass(&self) -> f64 {
        self.params.mass
    }

    fn width(&self) -> f64 {
        self.sigma.unwrap_or_else(|| {
            let omega_r = match self.potential {
                PotentialTemplate::QuarticDoubleWell => self.omega_r,
                // the ramp and free scenarios reuse the decoherence packets
                _ => FIG1_OMEGA_R,
            };
            ground_state_width(self.params.hbar, self.mass(), 2.0 * omega_r)
        })
    }

    fn potential_for(&self, slope: f64) -> PotentialSpec {
        match self.potential {
            PotentialTemplate::QuarticDoubleWell => PotentialSpec::quartic(self.omega_r, self.x0, self.mass()),
            PotentialTemplate::Linear => PotentialSpec::linear(slope, self.mass()),
            PotentialTemplate::Free => PotentialSpec::free(self.mass()),
        }
    }

    fn initial_for(&self, params: &EvolutionParams, potential: &PotentialSpec) -> InitialState {
        let width = self.width();
        match self.initial {
            InitialRecipe::DoubleGaussianAtWells => InitialState::DoubleGaussian { center: self.x0, width },
            InitialRecipe::GaussianAtRightMinimum => {
                let center = well_minima(potential, &DampingParams::new(params.gamma, params.mu))
                    .map(|(_, right)| right)
                    .unwrap_or(self.x0);
                InitialState::Gaussian(GaussianSpec::new(center, width))
            }
        }
    }

    fn run(&self, tag: String, role: RunRole, params: EvolutionParams, slope: f64) -> RunSpec {
        let potential = self.potential_for(slope);
        let initial = self.initial_for(&params, &potential);
        RunSpec {
            tag,
            role,
            params,
            potential,
            initial,
        }
    }

    /// Every evolution the scenario needs: one per sweep value plus the
    /// baselines, without duplicates.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut runs: Vec<RunSpec> = Vec::new();
        let mut push = |r: RunSpec| {
            if !runs.iter().any(|q| q.tag == r.tag) {
                runs.push(r);
            }
        };
        for &v in &self.sweep_values {
            let mut p = self.params;
            let mut slope = 1.0;
            match self.sweep {
                SweepParam::Mu => p.mu = v,
                SweepParam::Gamma => p.gamma = v,
                SweepParam::SlopeFactor => slope = v,
                SweepParam::Rescale => {
                    p.gamma = self.gamma0 / v;
                    p.mu = self.mu0 * v;
                }
            }
            push(self.run(sweep_tag(self.sweep, v), RunRole::Sweep(v), p, slope));
            match self.measurement {
                Measurement::RelativeCoherence => {
                    let twin = EvolutionParams { mu: 0.0, ..p };
                    push(self.run(twin_tag(p.gamma), RunRole::UndampedTwin, twin, slope));
                }
                Measurement::SlopeRatio => {
                    push(self.run(sweep_tag(self.sweep, 1.0), RunRole::ReferenceSlope, p, 1.0));
                }
                _ => {}
            }
        }
        if self.measurement == Measurement::TransferProbability && self.sweep == SweepParam::Mu {
            let vn = EvolutionParams {
                gamma: 0.0,
                mu: 0.0,
                ..self.params
            };
            push(self.run("von-neumann".into(), RunRole::VonNeumann, vn, 1.0));
        }
        runs
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v}")
}

pub fn sweep_tag(param: SweepParam, v: f64) -> String {
    let key = match param {
        SweepParam::Mu => "mu",
        SweepParam::Gamma => "gamma",
        SweepParam::SlopeFactor => "g",
        SweepParam::Rescale => "a",
    };
    format!("{key}={}", format_value(v))
}

pub fn twin_tag(gamma: f64) -> String {
    format!("gamma={},mu=0", format_value(gamma))
}
