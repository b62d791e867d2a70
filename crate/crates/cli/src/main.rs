use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dampedqbm::harness::{self, catalog::format_value, validate, Overrides, RunOptions, SweepParam};

/// Density-matrix simulations of a particle coupled to a damped oscillator bath.
#[derive(Parser)]
#[command(name = "dampedqbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSV files plus a manifest.
    Run {
        scenario: String,
        /// key=value file, one pair per line.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one key, e.g. --set mu-list=0.1,1. Applied after --config.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        half_width: Option<f64>,
        /// Sweep runs executed in parallel.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the scenario catalog with defaults.
    List,
    /// Run the invariant checks on a coarse grid.
    Validate,
}

fn list() {
    for s in harness::catalog() {
        let values: Vec<String> = s.sweep_values.iter().map(|&v| format_value(v)).collect();
        println!("{}", s.name);
        println!("    {}", s.summary);
        println!(
            "    sweep {} = [{}] via {}",
            s.sweep.symbol(),
            values.join(", "),
            s.sweep.list_key()
        );
        let couplings = match s.sweep {
            SweepParam::Mu => format!("γ = {} fs⁻¹", s.params.gamma),
            SweepParam::Gamma => format!("μ = {} fs⁻¹", s.params.mu),
            SweepParam::SlopeFactor => format!("γ = {} fs⁻¹, μ = {} fs⁻¹", s.params.gamma, s.params.mu),
            SweepParam::Rescale => format!("γ = {} fs⁻¹ / a, μ = {} fs⁻¹ · a", s.gamma0, s.mu0),
        };
        println!(
            "    {couplings}, kT = {} eV, ω_R = {} fs⁻¹, x0 = {} Å",
            s.params.kt, s.omega_r, s.x0
        );
        println!(
            "    grid {} points on ±{} Å, t_end = {} fs every {} fs",
            s.grid_points, s.half_width, s.t_end, s.record_interval
        );
    }
    println!();
    println!("config keys:");
    for (key, doc) in harness::config::KEYS {
        println!("    {key:<16} {doc}");
    }
}

fn validate() -> ExitCode {
    let checks = validate::run_checks();
    let mut ok = true;
    for c in &checks {
        println!("{} {:<20} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    scenario: &str,
    config: Option<PathBuf>,
    set: Vec<String>,
    out: PathBuf,
    grid_points: Option<usize>,
    half_width: Option<f64>,
    workers: Option<usize>,
) -> ExitCode {
    let overrides = match Overrides::load(config.as_deref(), &set).and_then(|mut o| {
        if let Some(n) = grid_points {
            o.set("grid_points", &n.to_string())?;
        }
        if let Some(l) = half_width {
            o.set("half_width", &l.to_string())?;
        }
        if let Some(w) = workers {
            o.set("workers", &w.to_string())?;
        }
        Ok(o)
    }) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let options = RunOptions { out_dir: Some(out) };
    match harness::run_scenario(scenario, &overrides, &options) {
        Ok(output) => {
            for s in &output.series {
                if let Some((t, v)) = s.last() {
                    println!("{:<24} t = {t} fs: {v:.6e}", s.label);
                }
            }
            for w in &output.manifest.warnings {
                eprintln!("warning: {w}");
            }
            for path in &output.manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Validate => validate(),
        Command::Run {
            scenario,
            config,
            set,
            out,
            grid_points,
            half_width,
            workers,
        } => run(&scenario, config, set, out, grid_points, half_width, workers),
    }
}
