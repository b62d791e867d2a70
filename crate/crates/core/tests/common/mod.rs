//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;

use dampedqbm::evolution::EvolutionParams;
use dampedqbm::grid::{DensityField, SpatialGrid};

/// Standard Caldeira-Leggett generator with a user potential, written node
/// by node from the textbook form; knows nothing about the damped-bath term.
pub fn caldeira_leggett_rhs(
    rho: &Array2<Complex64>,
    x: &[f64],
    h: f64,
    p: &EvolutionParams,
    v: &dyn Fn(f64) -> f64,
) -> Array2<Complex64> {
    let n = x.len();
    let i = Complex64::i();
    let get = |a: usize, b: usize| rho[[a, b]];
    let mut out = Array2::zeros((n, n));
    for a in 1..n - 1 {
        for b in 1..n - 1 {
            let d2x = (get(a + 1, b) - get(a, b) * 2.0 + get(a - 1, b)) / (h * h);
            let d2y = (get(a, b + 1) - get(a, b) * 2.0 + get(a, b - 1)) / (h * h);
            let dx = (get(a + 1, b) - get(a - 1, b)) / (2.0 * h);
            let dy = (get(a, b + 1) - get(a, b - 1)) / (2.0 * h);
            let q = x[a] - x[b];
            let kinetic = i * (p.hbar / (2.0 * p.mass)) * (d2x - d2y);
            let potential = -i * ((v(x[a]) - v(x[b])) / p.hbar) * get(a, b);
            let friction = -(dx - dy) * (p.gamma * q);
            let diffusion = -get(a, b) * (2.0 * p.mass * p.gamma * p.kt * q * q / (p.hbar * p.hbar));
            out[[a, b]] = kinetic + potential + friction + diffusion;
        }
    }
    out
}

/// Classical fourth-order Runge-Kutta with the oracle generator.
pub fn caldeira_leggett_evolve(
    start: &DensityField,
    p: &EvolutionParams,
    v: &dyn Fn(f64) -> f64,
    dt: f64,
    steps: usize,
) -> Array2<Complex64> {
    let g = start.grid();
    let x = g.points().to_vec();
    let h = g.spacing();
    let f = |r: &Array2<Complex64>| caldeira_leggett_rhs(r, &x, h, p, v);
    let mut rho = start.values().clone();
    for _ in 0..steps {
        let k1 = f(&rho);
        let k2 = f(&(&rho + &(&k1 * Complex64::from(dt / 2.0))));
        let k3 = f(&(&rho + &(&k2 * Complex64::from(dt / 2.0))));
        let k4 = f(&(&rho + &(&k3 * Complex64::from(dt))));
        rho = &rho + &((k1 + &k2 * Complex64::from(2.0) + &k3 * Complex64::from(2.0) + k4) * Complex64::from(dt / 6.0));
    }
    rho
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Position variance of the diagonal, plain Riemann sums.
pub fn position_variance(field: &DensityField) -> f64 {
    let g: &SpatialGrid = field.grid();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, &x) in g.points().iter().enumerate() {
        let p = field.values()[[k, k]].re;
        m0 += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    m2 / m0 - (m1 / m0).powi(2)
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Gradient of `(Mω²/2x0²)(x² − x0²)² − ½Mγμx²` by central differences.
pub fn numeric_gradient(x: f64, mass: f64, omega_r: f64, x0: f64, gamma_mu: f64) -> f64 {
    let v = |x: f64| mass * omega_r * omega_r / (2.0 * x0 * x0) * (x * x - x0 * x0).powi(2) - 0.5 * mass * gamma_mu * x * x;
    let e = 1e-5 * x0;
    (v(x + e) - v(x - e)) / (2.0 * e)
}
