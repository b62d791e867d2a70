//! Quick invariant checks at reduced resolution.

use ndarray::Array2;
use num_complex::Complex64;

use crate::evolution::{evolve, EvolutionParams, MasterEquation, StepperConfig};
use crate::grid::{hermiticity_defect, trace, DensityField, SpatialGrid};
use crate::observables::purity;
use crate::potentials::{v_full_gradient, v_renormalized, well_minima, DampingParams, PotentialSpec};
use crate::states::{double_gaussian, gaussian_pure, GaussianSpec};
use crate::units::{proton_like_mass, HBAR, KT_ROOM};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64, what: &str) -> Check {
    Check {
        name,
        passed: value.is_finite() && value < limit,
        detail: format!("{what} = {value:.3e} (limit {limit:.0e})"),
    }
}

fn params(gamma: f64, mu: f64) -> EvolutionParams {
    EvolutionParams {
        hbar: HBAR,
        mass: proton_like_mass(),
        gamma,
        mu,
        kt: KT_ROOM,
    }
}

fn stepper(eq: &MasterEquation, t_end: f64) -> StepperConfig {
    StepperConfig::with_cadence(t_end, 0.5, eq.suggested_dt(1.0)).expect("positive cadence")
}

/// Textbook Caldeira-Leggett generator, one node at a time.
fn standard_caldeira_leggett(rho: &Array2<Complex64>, grid: &SpatialGrid, p: &EvolutionParams, v: impl Fn(f64) -> f64) -> Array2<Complex64> {
    let n = grid.n_points();
    let h = grid.spacing();
    let x = grid.points();
    let i_unit = Complex64::new(0.0, 1.0);
    let at = |i: usize, j: usize| rho[[i, j]];
    let mut out = Array2::zeros((n, n));
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let dxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h * h);
            let dyy = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h * h);
            let dx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
            let dy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * h);
            let q = x[i] - x[j];
            out[[i, j]] = i_unit * p.hbar / (2.0 * p.mass) * (dxx - dyy)
                - i_unit / p.hbar * (v(x[i]) - v(x[j])) * at(i, j)
                - p.gamma * q * (dx - dy)
                - 2.0 * p.mass * p.gamma * p.kt / (p.hbar * p.hbar) * q * q * at(i, j);
        }
    }
    out
}

fn variance(field: &DensityField) -> f64 {
    let g = field.grid();
    let w = g.trapezoid_weights();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, &x) in g.points().iter().enumerate() {
        let p = w[k] * field.values()[[k, k]].re;
        m0 += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    m2 / m0 - (m1 / m0).powi(2)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(a) < 0.0) == (f(m) < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Runs every check on a 129-point grid. Takes a few seconds.
pub fn run_checks() -> Vec<Check> {
    let grid = SpatialGrid::new(8.0, 129).expect("valid grid");
    let mass = proton_like_mass();
    let quartic = PotentialSpec::quartic(0.025, 2.5, mass);
    let cat = double_gaussian(2.5, 0.5, &grid).expect("resolved state");
    let mut checks = Vec::new();

    let p = params(2.5e-4, 1.0);
    let eq = MasterEquation::new(&grid, &p, &quartic);
    let (mut tr_err, mut herm) = (0.0_f64, 0.0_f64);
    let run = evolve(&cat, &stepper(&eq, 10.0), &p, &quartic, |_, f| {
        tr_err = tr_err.max((trace(f)? - 1.0).abs());
        herm = herm.max(hermiticity_defect(f) / f.max_abs());
        Ok(())
    });
    match run {
        Ok(_) => {
            checks.push(check("trace conservation", tr_err, 1e-5, "max |tr ρ - 1| over 10 fs"));
            checks.push(check("hermiticity", herm, 1e-9, "max relative defect over 10 fs"));
        }
        Err(e) => checks.push(Check {
            name: "trace conservation",
            passed: false,
            detail: e.to_string(),
        }),
    }

    let p0 = params(2.5e-4, 0.0);
    let eq0 = MasterEquation::new(&grid, &p0, &quartic);
    let ours = eq0.rhs(&cat).expect("finite state");
    let reference = standard_caldeira_leggett(cat.values(), &grid, &p0, |x| v_renormalized(x, &quartic));
    let scale = reference.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let diff = (ours.values() - &reference).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    checks.push(check("μ = 0 limit", diff / scale, 1e-12, "relative RHS mismatch"));

    let unitary = params(0.0, 0.0);
    let packet = gaussian_pure(&GaussianSpec::new(2.5, 0.5), &grid).expect("resolved state");
    let eq_u = MasterEquation::new(&grid, &unitary, &quartic);
    let p_start = purity(&packet);
    let mut drift = 0.0_f64;
    let run = evolve(&packet, &stepper(&eq_u, 20.0), &unitary, &quartic, |_, f| {
        drift = drift.max((purity(f) - p_start).abs());
        Ok(())
    });
    checks.push(match run {
        Ok(_) => check("unitary purity", drift, 1e-4, "max purity change over 20 fs"),
        Err(e) => Check {
            name: "unitary purity",
            passed: false,
            detail: e.to_string(),
        },
    });

    let free = PotentialSpec::free(mass);
    let sigma = 0.5;
    let t = 20.0;
    let spread = gaussian_pure(&GaussianSpec::new(0.0, sigma), &grid).expect("resolved state");
    let eq_f = MasterEquation::new(&grid, &unitary, &free);
    let expected = sigma * sigma + (HBAR * t / (2.0 * mass * sigma)).powi(2);
    checks.push(match evolve(&spread, &stepper(&eq_f, t), &unitary, &free, |_, _| Ok(())) {
        Ok(end) => check(
            "free spreading",
            (variance(&end) / expected - 1.0).abs(),
            2e-2,
            "relative variance error at 20 fs",
        ),
        Err(e) => Check {
            name: "free spreading",
            passed: false,
            detail: e.to_string(),
        },
    });

    let spec = PotentialSpec::quartic(0.005, 2.5, mass);
    let damping = DampingParams::new(2.5e-4, 1.0);
    let (_, x_min) = well_minima(&spec, &damping).expect("quartic");
    let root = bisect(|x| v_full_gradient(x, &spec, &damping), 0.5, 20.0);
    checks.push(check("well minima", (x_min - root).abs(), 1e-8, "closed form vs root (Å)"));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_checks();
        assert_eq!(checks.len(), 6);
        for c in checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
