//! Executes a scenario: one evolution per run, derived series, files.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::catalog::{self, InitialState, Measurement, RunRole, RunSpec, Scenario};
use super::config::{ConfigError, Overrides};
use super::output::{write_csv, write_json, OutputError};
use crate::evolution::{evolve_with, probe_stability, EvolutionError, MasterEquation, StabilityProbe, StepperConfig};
use crate::grid::{hermiticity_defect, trace, DensityField, GridError, SpatialGrid};
use crate::observables::{
    fingerprint, l1_coherence, left_probability, purity, relative_coherence, ObservableError, ObservableSeries,
};
use crate::potentials::well_minima;
use crate::states::{double_gaussian, gaussian_pure, StateError};
use crate::units::{HBAR, SPEED_OF_LIGHT};

/// Largest tolerated `|ρ̃|` next to the Dirichlet ring.
pub const BOUNDARY_FLUX_LIMIT: f64 = 1e-8;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (see `dampedqbm list`)")]
    UnknownScenario(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run {tag}: {message}")]
    Invalid { tag: String, message: String },
    #[error("run {tag}: {source}")]
    State {
        tag: String,
        #[source]
        source: StateError,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("run {tag}: {source}")]
    Evolution {
        tag: String,
        #[source]
        source: EvolutionError,
    },
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl ScenarioError {
    /// 2 for bad input, 3 for a numerical abort, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Evolution { .. } => 3,
            ScenarioError::Output(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Error)]
#[error("|ρ̃| = {value:e} next to the boundary exceeds {BOUNDARY_FLUX_LIMIT:e}; widen the grid")]
pub struct BoundaryLeak {
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where CSV and manifest files go; `None` writes nothing.
    pub out_dir: Option<PathBuf>,
}

/// Raw per-run time series.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub spec: RunSpec,
    pub probe: StabilityProbe,
    pub coherence: ObservableSeries,
    pub left_probability: ObservableSeries,
    pub trace: ObservableSeries,
    /// Hermiticity defect relative to `max |ρ̃|`.
    pub hermiticity: ObservableSeries,
    pub boundary: ObservableSeries,
    pub purity: ObservableSeries,
    pub wall_seconds: f64,
}

fn max_of(s: &ObservableSeries, f: impl Fn(f64) -> f64) -> f64 {
    s.values.iter().map(|&v| f(v)).fold(0.0, f64::max)
}

impl RunRecord {
    pub fn max_trace_error(&self) -> f64 {
        max_of(&self.trace, |v| (v - 1.0).abs())
    }

    pub fn max_hermiticity(&self) -> f64 {
        max_of(&self.hermiticity, |v| v)
    }

    pub fn max_boundary(&self) -> f64 {
        max_of(&self.boundary, |v| v)
    }

    fn diagnostics(&self) -> [&ObservableSeries; 6] {
        [
            &self.coherence,
            &self.left_probability,
            &self.trace,
            &self.hermiticity,
            &self.boundary,
            &self.purity,
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitConstants {
    pub hbar_ev_fs: f64,
    pub speed_of_light_angstrom_per_fs: f64,
    pub mass_ev_fs2_per_angstrom2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub tag: String,
    pub role: RunRole,
    pub params_fingerprint: String,
    pub probe: StabilityProbe,
    pub max_trace_error: f64,
    pub max_hermiticity: f64,
    pub boundary_flux_max: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub code_version: &'static str,
    pub units: UnitConstants,
    pub resolved: Scenario,
    pub runs_planned: Vec<RunSpec>,
    pub grid_spacing: f64,
    pub stepper: Option<StepperConfig>,
    /// Smallest accepted probe step over all runs; every run uses it.
    pub stability_probe: Option<StabilityProbe>,
    pub boundary_flux_max: Option<f64>,
    pub runs: Vec<RunSummary>,
    pub warnings: Vec<String>,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    /// The measured quantity per sweep value, plus the baseline where the
    /// scenario has one.
    pub series: Vec<ObservableSeries>,
    pub runs: Vec<RunRecord>,
    pub manifest: RunManifest,
}

impl ScenarioOutput {
    pub fn run(&self, tag: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.spec.tag == tag)
    }

    pub fn series(&self, label: &str) -> Option<&ObservableSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn initial_field(spec: &RunSpec, grid: &SpatialGrid) -> Result<DensityField, ScenarioError> {
    let state = match spec.initial {
        InitialState::DoubleGaussian { center, width } => double_gaussian(center, width, grid),
        InitialState::Gaussian(g) => gaussian_pure(&g, grid),
    };
    state.map_err(|source| ScenarioError::State {
        tag: spec.tag.clone(),
        source,
    })
}

struct Prepared {
    spec: RunSpec,
    eq: MasterEquation,
    initial: DensityField,
    probe: StabilityProbe,
}

fn prepare(spec: RunSpec, grid: &SpatialGrid, dt_max: Option<f64>) -> Result<Prepared, ScenarioError> {
    spec.params.validate().map_err(|message| ScenarioError::Invalid {
        tag: spec.tag.clone(),
        message,
    })?;
    let initial = initial_field(&spec, grid)?;
    let eq = MasterEquation::new(grid, &spec.params, &spec.potential);
    let start = dt_max.map_or(eq.suggested_dt(1.0), |d| d.min(eq.suggested_dt(1.0)));
    let probe = probe_stability(&eq, &spec.params, start).map_err(|source| ScenarioError::Evolution {
        tag: spec.tag.clone(),
        source,
    })?;
    Ok(Prepared {
        spec,
        eq,
        initial,
        probe,
    })
}

fn execute(run: &Prepared, grid: &SpatialGrid, cfg: &StepperConfig) -> Result<RunRecord, ScenarioError> {
    let started = Instant::now();
    let tag = &run.spec.tag;
    let fp = fingerprint(&run.spec);
    let named = |what: &str| ObservableSeries::new(format!("{what}@{tag}"), fp.clone());
    let mut rec = RunRecord {
        spec: run.spec.clone(),
        probe: run.probe,
        coherence: named("C"),
        left_probability: named("P_left"),
        trace: named("trace"),
        hermiticity: named("hermiticity"),
        boundary: named("boundary"),
        purity: named("purity"),
        wall_seconds: 0.0,
    };
    let l_int = grid.half_width();
    evolve_with(&run.eq, &run.initial, cfg, |t, f| {
        let boundary = f.boundary_max_abs();
        rec.coherence.push(t, l1_coherence(f, l_int));
        rec.left_probability.push(t, left_probability(f)?);
        rec.trace.push(t, trace(f)?);
        rec.hermiticity.push(t, hermiticity_defect(f) / f.max_abs());
        rec.boundary.push(t, boundary);
        rec.purity.push(t, purity(f));
        if boundary > BOUNDARY_FLUX_LIMIT {
            return Err(Box::new(BoundaryLeak { value: boundary }));
        }
        Ok(())
    })
    .map_err(|source| ScenarioError::Evolution {
        tag: tag.clone(),
        source,
    })?;
    rec.wall_seconds = started.elapsed().as_secs_f64();
    Ok(rec)
}

/// Warns when decoherence across the wells outruns the bath damping, the
/// regime the model does not cover.
fn mu_range_warnings(scenario: &Scenario, runs: &[RunSpec]) -> Vec<String> {
    runs.iter()
        .filter(|r| r.params.mu > 0.0 && r.params.gamma > 0.0)
        .filter_map(|r| {
            let x_min = well_minima(&r.potential, &r.params.damping()).map_or(scenario.x0, |m| m.1);
            let tau = 1.0 / (r.params.decoherence_coefficient() * (2.0 * x_min).powi(2));
            (tau < 1.0 / r.params.mu).then(|| {
                format!(
                    "run {}: decoherence time {tau:.3} fs is shorter than the bath damping time 1/μ = {:.3} fs",
                    r.tag,
                    1.0 / r.params.mu
                )
            })
        })
        .collect()
}

fn derived_series(scenario: &Scenario, runs: &[RunRecord], warnings: &mut Vec<String>) -> Result<Vec<ObservableSeries>, ScenarioError> {
    let find = |tag: &str| runs.iter().find(|r| r.spec.tag == tag).expect("planned run executed");
    let mut out = Vec::new();
    for &v in &scenario.sweep_values {
        let label = format!("{}@{}", scenario.measurement.label(), catalog::format_value(v));
        let run = find(&catalog::sweep_tag(scenario.sweep, v));
        let mut series = match scenario.measurement {
            Measurement::RelativeCoherence | Measurement::SlopeRatio => {
                let base_tag = if scenario.measurement == Measurement::RelativeCoherence {
                    catalog::twin_tag(run.spec.params.gamma)
                } else {
                    catalog::sweep_tag(scenario.sweep, 1.0)
                };
                let ratio = relative_coherence(&run.coherence, &find(&base_tag).coherence)?;
                if let Some(t) = ratio.truncated_at {
                    warnings.push(format!("{label}: reference coherence fell below the floor at t = {t} fs"));
                }
                ratio.series
            }
            Measurement::TransferProbability => run.left_probability.clone(),
            Measurement::Coherence => run.coherence.clone(),
        };
        series.label = label;
        out.push(series);
    }
    if let Some(vn) = runs.iter().find(|r| r.spec.role == RunRole::VonNeumann) {
        let mut s = vn.left_probability.clone();
        s.label = format!("{}@{}", scenario.measurement.label(), vn.spec.tag);
        out.push(s);
    }
    Ok(out)
}

/// Looks up `name`, applies `overrides` and runs it.
pub fn run_scenario(name: &str, overrides: &Overrides, options: &RunOptions) -> Result<ScenarioOutput, ScenarioError> {
    let base = catalog::find(name).ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))?;
    let scenario = base.with_overrides(overrides)?;
    run_resolved(&scenario, options)
}

struct Files {
    csv: PathBuf,
    diagnostics: PathBuf,
    manifest: PathBuf,
}

impl Files {
    fn new(dir: &Path, name: &str) -> Self {
        Self {
            csv: dir.join(format!("{name}.csv")),
            diagnostics: dir.join(format!("{name}.diagnostics.csv")),
            manifest: dir.join(format!("{name}.manifest.json")),
        }
    }
}

/// Runs an already resolved scenario. The manifest is written with status
/// `running` before the first step and finalized afterwards, also on failure.
pub fn run_resolved(scenario: &Scenario, options: &RunOptions) -> Result<ScenarioOutput, ScenarioError> {
    let grid = SpatialGrid::new(scenario.half_width, scenario.grid_points)?;
    let planned = scenario.runs();
    let mut manifest = RunManifest {
        scenario: scenario.name.to_string(),
        status: RunStatus::Running,
        error: None,
        code_version: CODE_VERSION,
        units: UnitConstants {
            hbar_ev_fs: HBAR,
            speed_of_light_angstrom_per_fs: SPEED_OF_LIGHT,
            mass_ev_fs2_per_angstrom2: scenario.params.mass,
        },
        resolved: scenario.clone(),
        runs_planned: planned.clone(),
        grid_spacing: grid.spacing(),
        stepper: None,
        stability_probe: None,
        boundary_flux_max: None,
        runs: Vec::new(),
        warnings: mu_range_warnings(scenario, &planned),
        started_unix_s: unix_now(),
        finished_unix_s: None,
        outputs: Vec::new(),
    };
    for w in &manifest.warnings {
        log::warn!("{w}");
    }
    let files = match &options.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
                path: dir.clone(),
                source,
            })?;
            let f = Files::new(dir, scenario.name);
            manifest.outputs = vec![f.csv.clone(), f.diagnostics.clone(), f.manifest.clone()];
            write_json(&manifest, &f.manifest)?;
            Some(f)
        }
        None => None,
    };

    let result = execute_all(scenario, &grid, planned, &mut manifest);
    manifest.finished_unix_s = Some(unix_now());
    match result {
        Ok((runs, series)) => {
            manifest.status = RunStatus::Completed;
            if let Some(f) = &files {
                write_csv(&series, &f.csv)?;
                let diag: Vec<ObservableSeries> = runs.iter().flat_map(|r| r.diagnostics()).cloned().collect();
                write_csv(&diag, &f.diagnostics)?;
                write_json(&manifest, &f.manifest)?;
            }
            Ok(ScenarioOutput { series, runs, manifest })
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            if let Some(f) = &files {
                write_json(&manifest, &f.manifest)?;
            }
            Err(e)
        }
    }
}

type Executed = (Vec<RunRecord>, Vec<ObservableSeries>);

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn execute_all(
    scenario: &Scenario,
    grid: &SpatialGrid,
    planned: Vec<RunSpec>,
    manifest: &mut RunManifest,
) -> Result<Executed, ScenarioError> {
    let workers = scenario.workers;
    let prepared: Vec<Prepared> = in_pool(workers, || {
        planned
            .into_par_iter()
            .map(|spec| prepare(spec, grid, scenario.dt_max))
            .collect::<Result<_, _>>()
    })?;
    let Some(probe) = prepared.iter().map(|p| p.probe).min_by(|a, b| a.dt.total_cmp(&b.dt)) else {
        return Ok((Vec::new(), Vec::new()));
    };
    manifest.stability_probe = Some(probe);
    // one step size for every run, so ratios compare like with like
    let cfg = StepperConfig::with_cadence(scenario.t_end, scenario.record_interval, probe.dt).map_err(|source| {
        ScenarioError::Evolution {
            tag: "all".into(),
            source,
        }
    })?;
    manifest.stepper = Some(cfg);
    log::info!(
        "{}: {} runs, dt = {:.4} fs, {} steps each",
        scenario.name,
        prepared.len(),
        cfg.dt,
        cfg.n_steps().unwrap_or(0)
    );
    let outcomes: Vec<Result<RunRecord, ScenarioError>> =
        in_pool(workers, || prepared.par_iter().map(|p| execute(p, grid, &cfg)).collect());
    let mut runs = Vec::new();
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                log::info!("{}: run {} done in {:.1} s", scenario.name, r.spec.tag, r.wall_seconds);
                runs.push(r)
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    manifest.runs = runs
        .iter()
        .map(|r| RunSummary {
            tag: r.spec.tag.clone(),
            role: r.spec.role.clone(),
            params_fingerprint: r.coherence.params_fingerprint.clone(),
            probe: r.probe,
            max_trace_error: r.max_trace_error(),
            max_hermiticity: r.max_hermiticity(),
            boundary_flux_max: r.max_boundary(),
            wall_seconds: r.wall_seconds,
        })
        .collect();
    manifest.boundary_flux_max = runs.iter().map(RunRecord::max_boundary).reduce(f64::max);
    if let Some(e) = first_error {
        return Err(e);
    }
    let series = derived_series(scenario, &runs, &mut manifest.warnings)?;
    Ok((runs, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, flags: &[&str]) -> Scenario {
        let mut o = Overrides::default();
        for f in ["grid_points=129", "t_end=2", "sigma=0.5"].iter().chain(flags) {
            o.set_flag(f).unwrap();
        }
        catalog::find(name).unwrap().with_overrides(&o).unwrap()
    }

    #[test]
    fn zero_mu_gives_unit_relative_coherence() {
        let s = small("decoherence-mu", &["mu-list=0"]);
        let out = run_resolved(&s, &RunOptions::default()).unwrap();
        // the sweep run and its twin coincide
        assert_eq!(out.runs.len(), 2);
        let c = out.series("C_R@0").unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn repeated_slope_gives_unit_ratio() {
        let s = small("decoherence-slope", &["g-list=1,1", "half_width=8"]);
        let out = run_resolved(&s, &RunOptions::default()).unwrap();
        assert_eq!(out.series.len(), 2);
        assert_eq!(out.series[0], out.series[1]);
        assert!(out.series[0].values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn files_are_written_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
        };
        let s = small("rescaled-free", &["a-list=1,2", "workers=2"]);
        let out = run_resolved(&s, &opts).unwrap();
        assert_eq!(out.manifest.status, RunStatus::Completed);
        let csv = std::fs::read(dir.path().join("rescaled-free.csv")).unwrap();
        let header = String::from_utf8(csv.clone()).unwrap();
        assert!(header.starts_with("t_fs,C@1,C@2\n"));
        let again = run_resolved(&s, &opts).unwrap();
        assert_eq!(std::fs::read(dir.path().join("rescaled-free.csv")).unwrap(), csv);
        assert_eq!(out.series, again.series);
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("rescaled-free.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "completed");
        assert!(manifest["stability_probe"]["dt"].as_f64().unwrap() > 0.0);
        assert!(manifest["boundary_flux_max"].as_f64().unwrap() < BOUNDARY_FLUX_LIMIT);
    }

    #[test]
    fn failures_mark_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
        };
        // the packet starts almost on the boundary
        let s = small("rescaled-free", &["a-list=1", "half_width=4"]);
        let err = run_resolved(&s, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("rescaled-free.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "failed");
        assert!(manifest["error"].as_str().unwrap().contains("a=1"));
    }

    #[test]
    fn unknown_scenario() {
        let err = run_scenario("fig-9", &Overrides::default(), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownScenario(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn guard_flags_weak_bath_damping() {
        let mut s = catalog::find("decoherence-mu").unwrap();
        // τ_dec ≈ 10.7 fs across the wells
        s.sweep_values = vec![0.05];
        assert_eq!(mu_range_warnings(&s, &s.runs()).len(), 1);
        s.sweep_values = vec![0.1, 1.0];
        assert!(mu_range_warnings(&s, &s.runs()).is_empty());
    }
}
