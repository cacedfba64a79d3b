//! Cavity observables and their squeezed-thermal characterization.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::correlations::{CorrelationFunctions, InitialStateSpec};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::propagator::PropagatorSolution;

/// Tolerance on the uncertainty bound `det ≥ ¼`.
pub const PHYSICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrajectory {
    pub grid: TimeGrid,
    pub mean: Vec<Complex64>,
    pub n: Vec<f64>,
    pub s: Vec<Complex64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub nbar: Vec<f64>,
    pub physical_flags: Vec<bool>,
    /// Nodes where the squeezing decomposition had to clamp `|s|`.
    pub clamped: Vec<usize>,
}

/// Squeezed-thermal parameters of a zero-mean single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    pub r: f64,
    pub theta: f64,
    pub nbar: f64,
    /// Set when `(n, s)` violated the uncertainty bound and `|s|` was reduced
    /// to the pure-state value `√((n+½)² − ¼)`.
    pub clamped: bool,
}

/// `(n + ½)² − |s|²`, the covariance determinant.
pub fn uncertainty_product(n: f64, s: Complex64) -> f64 {
    (n + 0.5).powi(2) - s.norm_sqr()
}

/// `r = ¼ ln[(n+|s|+½)/(n−|s|+½)]`, `θ = arg s`, `n̄ = √((n+½)² − |s|²) − ½`.
pub fn squeezing_decomposition(n: f64, s: Complex64) -> Squeezing {
    let a = n + 0.5;
    let mut b = s.norm();
    let theta = if b == 0.0 { 0.0 } else { s.arg() };
    let mut det = a * a - b * b;
    let clamped = det < 0.25 - PHYSICAL_TOL;
    if clamped {
        b = (a * a - 0.25).max(0.0).sqrt();
        det = 0.25;
    }
    // ¼ ln((a+b)/(a−b)) = ½ artanh(b/a)
    let r = if b == 0.0 { 0.0 } else { 0.5 * (b / a).atanh() };
    Squeezing {
        r,
        theta,
        nbar: det.max(0.0).sqrt() - 0.5,
        clamped,
    }
}

/// Quadrature covariance for `X = (a+a†)/√2`, `Y = (a−a†)/(√2 i)`.
pub fn covariance_matrix(n: f64, s: Complex64) -> Matrix2<f64> {
    Matrix2::new(0.5 + n + s.re, s.im, s.im, 0.5 + n - s.re)
}

pub fn evolve_observables(
    sol: &PropagatorSolution,
    corr: &CorrelationFunctions,
    spec: &InitialStateSpec,
) -> Result<ObservableTrajectory> {
    let grid = sol.grid;
    if corr.grid != grid {
        return Err(Error::GridMismatch {
            what: "correlation functions",
            found: corr.grid.len(),
            expected: grid.len(),
        });
    }
    let init = spec.cavity();
    let len = grid.len();
    let mut t = ObservableTrajectory {
        grid,
        mean: Vec::with_capacity(len),
        n: Vec::with_capacity(len),
        s: Vec::with_capacity(len),
        r: Vec::with_capacity(len),
        theta: Vec::with_capacity(len),
        nbar: Vec::with_capacity(len),
        physical_flags: Vec::with_capacity(len),
        clamped: Vec::new(),
    };
    for j in 0..len {
        let u = sol.u[j];
        let mean = u * init.mean + corr.v0[j];
        let n = u.norm_sqr() * init.n0 + 2.0 * (u.conj() * corr.nu1[j]).re + corr.v1[j];
        let s = u * u * init.s0 + 2.0 * u * corr.nu2[j] + corr.v2[j];
        let sq = squeezing_decomposition(n, s);
        if sq.clamped {
            t.clamped.push(j);
        }
        t.mean.push(mean);
        t.n.push(n);
        t.s.push(s);
        t.r.push(sq.r);
        t.theta.push(sq.theta);
        t.nbar.push(sq.nbar);
        t.physical_flags.push(uncertainty_product(n, s) >= 0.25 - PHYSICAL_TOL);
    }
    Ok(t)
}
