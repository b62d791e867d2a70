//! Spatial discretization and the density-matrix container.
//!
//! Both axes of the `(x, y)` plane share one symmetric grid whose node set
//! always contains `0`. All integrals use the trapezoid rule; half-axis
//! integrals give the node at `0` half weight so the four quadrants add up
//! exactly to the full-plane integral.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

/// Imaginary diagonal mass above this is treated as a corrupted state.
pub const DIAGONAL_IMAG_TOLERANCE: f64 = 1e-10;

pub const MIN_POINTS: usize = 33;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("even point count {0}: x = 0 must be a grid node")]
    EvenPointCount(usize),
    #[error("point count {0} is below the minimum of {MIN_POINTS}")]
    TooFewPoints(usize),
    #[error("half width must be positive and finite, got {0}")]
    NonPositiveHalfWidth(f64),
    #[error("field shape {rows}x{cols} does not match grid of {n} points")]
    ShapeMismatch { rows: usize, cols: usize, n: usize },
    #[error("corrupted state: imaginary diagonal mass {0:e} exceeds tolerance")]
    ImaginaryDiagonal(f64),
}

/// Uniform symmetric grid on `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    spacing: f64,
    points: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::NonPositiveHalfWidth(half_width));
        }
        if n_points % 2 == 0 {
            return Err(GridError::EvenPointCount(n_points));
        }
        if n_points < MIN_POINTS {
            return Err(GridError::TooFewPoints(n_points));
        }
        Ok(Self::build(half_width, n_points))
    }

    fn build(half_width: f64, n_points: usize) -> Self {
        let spacing = 2.0 * half_width / (n_points - 1) as f64;
        let mid = n_points / 2;
        // Built from the centre outwards so that the node set is exactly
        // mirror symmetric and contains an exact 0.
        let points = (0..n_points)
            .map(|k| {
                if k == 0 {
                    -half_width
                } else if k == n_points - 1 {
                    half_width
                } else {
                    (k as f64 - mid as f64) * spacing
                }
            })
            .collect();
        Self {
            half_width,
            spacing,
            points,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of the node at `x = 0`.
    pub fn center_index(&self) -> usize {
        self.points.len() / 2
    }

    /// Index of the node closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x + self.half_width) / self.spacing).round();
        k.clamp(0.0, (self.n_points() - 1) as f64) as usize
    }

    /// Full-axis trapezoid weights (`h/2` at both ends, `h` elsewhere).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.n_points();
        let mut w = vec![self.spacing; n];
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }

    /// Trapezoid weights for one half axis restricted to `|x| <= limit`.
    ///
    /// Nodes outside the selected range get weight 0; the node at `0` and
    /// the outermost selected node get half weight.
    pub fn half_axis_weights(&self, side: HalfAxis, limit: f64) -> Vec<f64> {
        let n = self.n_points();
        let c = self.center_index();
        let tol = 1e-9 * self.spacing;
        let reach = (0..=c)
            .take_while(|&k| self.points[c + k] <= limit + tol)
            .last()
            .unwrap_or(0);
        let mut w = vec![0.0; n];
        if reach == 0 {
            return w;
        }
        for k in 0..=reach {
            let idx = match side {
                HalfAxis::Negative => c - k,
                HalfAxis::Positive => c + k,
            };
            w[idx] = if k == 0 || k == reach {
                0.5 * self.spacing
            } else {
                self.spacing
            };
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfAxis {
    Negative,
    Positive,
}

/// Region of the `(x, y)` plane for [`quadrant_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    /// `x > 0, y < 0`
    XPosYNeg,
    /// `x < 0, y > 0`; the coherence quadrant.
    XNegYPos,
    /// `x < 0, y < 0`
    DiagonalLeft,
    /// `x > 0, y > 0`
    DiagonalRight,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::XPosYNeg,
        Quadrant::XNegYPos,
        Quadrant::DiagonalLeft,
        Quadrant::DiagonalRight,
    ];

    fn axes(self) -> (HalfAxis, HalfAxis) {
        use HalfAxis::*;
        match self {
            Quadrant::XPosYNeg => (Positive, Negative),
            Quadrant::XNegYPos => (Negative, Positive),
            Quadrant::DiagonalLeft => (Negative, Negative),
            Quadrant::DiagonalRight => (Positive, Positive),
        }
    }
}

/// Reduced density matrix sampled on a grid; entry `(i, j)` is
/// `ρ̃(x_i, y_j)` in Å⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: SpatialGrid,
    values: Array2<Complex64>,
}

impl DensityField {
    pub fn zeros(grid: &SpatialGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            values: Array2::zeros((n, n)),
        }
    }

    pub fn from_values(grid: &SpatialGrid, values: Array2<Complex64>) -> Result<Self, GridError> {
        let (rows, cols) = values.dim();
        let n = grid.n_points();
        if rows != n || cols != n {
            return Err(GridError::ShapeMismatch { rows, cols, n });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Builds `ρ̃(x, y) = f(x, y)` by sampling on every node pair.
    pub fn from_fn(grid: &SpatialGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let pts = grid.points();
        let n = pts.len();
        let values = Array2::from_shape_fn((n, n), |(i, j)| f(pts[i], pts[j]));
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest magnitude on the outermost ring of interior nodes, next to
    /// the zero Dirichlet boundary.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.grid.n_points();
        let v = &self.values;
        let (lo, hi) = (1, n - 2);
        let mut m = 0.0_f64;
        for k in lo..=hi {
            m = m
                .max(v[[lo, k]].norm())
                .max(v[[hi, k]].norm())
                .max(v[[k, lo]].norm())
                .max(v[[k, hi]].norm());
        }
        m
    }

    /// Zeroes the outermost ring of nodes (the Dirichlet boundary).
    pub fn clamp_boundary(&mut self) {
        let n = self.grid.n_points();
        let zero = Complex64::new(0.0, 0.0);
        for k in 0..n {
            self.values[[0, k]] = zero;
            self.values[[n - 1, k]] = zero;
            self.values[[k, 0]] = zero;
            self.values[[k, n - 1]] = zero;
        }
    }

    /// Point reflection `(x, y) -> (-x, -y)`.
    pub fn reflected(&self) -> Self {
        let n = self.grid.n_points();
        let v = &self.values;
        let values = Array2::from_shape_fn((n, n), |(i, j)| v[[n - 1 - i, n - 1 - j]]);
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.mapv_inplace(|z| z * factor);
    }
}

/// Weighted diagonal sum `Σ w_i ρ̃(x_i, x_i)`, returning the real part after
/// checking the imaginary residue.
pub(crate) fn weighted_diagonal(field: &DensityField, weights: &[f64]) -> Result<f64, GridError> {
    let v = field.values();
    let re = mirror_sum(weights.len(), |i| weights[i] * v[[i, i]].re);
    let im = mirror_sum(weights.len(), |i| weights[i] * v[[i, i]].im);
    if im.abs() > DIAGONAL_IMAG_TOLERANCE {
        return Err(GridError::ImaginaryDiagonal(im.abs()));
    }
    Ok(re)
}

/// Sums `f(0) + ... + f(n-1)` by adding mirror pairs `f(k) + f(n-1-k)`
/// first, so the result is bit-identical under index reversal.
pub(crate) fn mirror_sum(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut s = 0.0;
    for k in 0..n / 2 {
        s += f(k) + f(n - 1 - k);
    }
    if n % 2 == 1 {
        s += f(n / 2);
    }
    s
}

/// Trapezoid quadrature of `ρ̃(x, x)` over `[-L, L]`.
pub fn trace(field: &DensityField) -> Result<f64, GridError> {
    weighted_diagonal(field, &field.grid().trapezoid_weights())
}

/// `max_ij |ρ̃_ij - conj(ρ̃_ji)|`.
pub fn hermiticity_defect(field: &DensityField) -> f64 {
    let v = field.values();
    let n = v.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((v[[i, j]] - v[[j, i]].conj()).norm());
        }
    }
    worst
}

/// `Σ_ij wx_i wy_j |ρ̃_ij|`.
pub(crate) fn weighted_abs_integral(field: &DensityField, wx: &[f64], wy: &[f64]) -> f64 {
    let v = field.values();
    let row = |i: usize| {
        if wx[i] == 0.0 {
            return 0.0;
        }
        let r = v.row(i);
        wx[i] * mirror_sum(wy.len(), |j| if wy[j] == 0.0 { 0.0 } else { wy[j] * r[j].norm() })
    };
    mirror_sum(wx.len(), row)
}

/// 2D trapezoid quadrature of `|ρ̃|` over one quadrant, with half weight on
/// the `x = 0` / `y = 0` node lines.
pub fn quadrant_integral(field: &DensityField, region: Quadrant) -> f64 {
    let grid = field.grid();
    let (sx, sy) = region.axes();
    let wx = grid.half_axis_weights(sx, grid.half_width());
    let wy = grid.half_axis_weights(sy, grid.half_width());
    weighted_abs_integral(field, &wx, &wy)
}

/// Trapezoid quadrature of `|ρ̃|` over the full plane.
pub fn abs_integral(field: &DensityField) -> f64 {
    let w = field.grid().trapezoid_weights();
    weighted_abs_integral(field, &w, &w)
}
