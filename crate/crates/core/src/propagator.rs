//! Propagating function `u(t)` and the convolution `F(t)`.
//!
//! `u` solves `u̇ = -iω_c u - ∫₀ᵗ g(t-τ) u(τ) dτ`, `u(0) = 1`. The stepper works
//! on `y = e^{iω_c t} u`, whose kernel `g(τ) e^{iω_c τ}` is slowly varying,
//! so the trapezoid rule does not have to resolve the carrier phase.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::reservoir::KernelSeries;

/// Nodes with `|u|` below this are treated as zeros of `u`.
pub const ZERO_THRESHOLD: f64 = 1e-8;
/// A step is rejected when `|u|` exceeds `1 + STEP_REJECT`.
pub const STEP_REJECT: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSolution {
    pub grid: TimeGrid,
    pub omega_c: f64,
    pub u: Vec<Complex64>,
    /// Right-hand side of the defining equation at each node.
    pub u_dot: Vec<Complex64>,
    pub zero_flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSeries {
    pub grid: TimeGrid,
    pub f: Vec<Complex64>,
    pub f_dot: Vec<Complex64>,
}

/// Trapezoidal product integration with one predictor–corrector pass per step.
pub fn solve_u(kernel: &KernelSeries, omega_c: f64, grid: TimeGrid) -> Result<PropagatorSolution> {
    if kernel.grid != grid {
        return Err(Error::GridMismatch {
            what: "kernel",
            found: kernel.values.len(),
            expected: grid.len(),
        });
    }
    grid.check_len("kernel", kernel.values.len())?;
    if !omega_c.is_finite() {
        return Err(Error::InvalidModel(format!("omega_c must be finite, got {omega_c}")));
    }
    let n = grid.len();
    let dt = grid.dt();
    let k: Vec<Complex64> = (0..n)
        .map(|j| kernel.values[j] * Complex64::from_polar(1.0, omega_c * grid.t(j)))
        .collect();

    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    y[0] = Complex64::new(1.0, 0.0);
    let half = 0.5 * dt;
    for m in 1..n {
        // History part of -∫ K(t_m - s) y(s) ds, all nodes but s = t_m.
        let mut acc = 0.5 * k[m] * y[0];
        for i in 1..m {
            acc += k[m - i] * y[i];
        }
        let known = -dt * acc;
        let pred = y[m - 1] + dt * rhs[m - 1];
        let r_pred = known - half * k[0] * pred;
        let corr = y[m - 1] + half * (rhs[m - 1] + r_pred);
        if !(corr.norm() <= 1.0 + STEP_REJECT) {
            return Err(Error::StepRejected {
                step: m,
                modulus: corr.norm(),
            });
        }
        y[m] = corr;
        rhs[m] = known - half * k[0] * corr;
    }

    let mut u = Vec::with_capacity(n);
    let mut u_dot = Vec::with_capacity(n);
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, -omega_c * grid.t(j));
        let uj = phase * y[j];
        u.push(uj);
        u_dot.push(-I * omega_c * uj + phase * rhs[j]);
    }
    u[0] = Complex64::new(1.0, 0.0);
    let zero_flags = flag_zeros(&u);
    Ok(PropagatorSolution {
        grid,
        omega_c,
        u,
        u_dot,
        zero_flags,
    })
}

pub(crate) fn flag_zeros(u: &[Complex64]) -> Vec<bool> {
    u.iter().map(|v| v.norm() < ZERO_THRESHOLD).collect()
}

/// Trapezoidal `Σ_i w_i a_i b_{j-i}` over `i = 0..=j`, times `dt`.
fn trapezoid_convolution(a: &[Complex64], b: &[Complex64], j: usize, dt: f64) -> Complex64 {
    if j == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = 0.5 * (a[0] * b[j] + a[j] * b[0]);
    for i in 1..j {
        acc += a[i] * b[j - i];
    }
    dt * acc
}

/// `F(t) = ∫₀ᵗ h(τ) u(t-τ) dτ` and its derivative `h(t)u(0) + ∫₀ᵗ h(τ) u̇(t-τ) dτ`.
pub fn compute_f(h: &KernelSeries, sol: &PropagatorSolution) -> Result<ConvolutionSeries> {
    if h.grid != sol.grid {
        return Err(Error::GridMismatch {
            what: "h kernel",
            found: h.values.len(),
            expected: sol.grid.len(),
        });
    }
    let dt = sol.grid.dt();
    let (f, f_dot): (Vec<_>, Vec<_>) = (0..sol.grid.len())
        .into_par_iter()
        .map(|j| {
            let f = trapezoid_convolution(&h.values, &sol.u, j, dt);
            let fd = h.values[j] * sol.u[0] + trapezoid_convolution(&h.values, &sol.u_dot, j, dt);
            (f, fd)
        })
        .unzip();
    Ok(ConvolutionSeries {
        grid: sol.grid,
        f,
        f_dot,
    })
}

/// `u̇/u` at node `j`; `None` at flagged zeros of `u`.
pub fn logarithmic_derivative(sol: &PropagatorSolution, j: usize) -> Option<Complex64> {
    if sol.zero_flags[j] {
        None
    } else {
        Some(sol.u_dot[j] / sol.u[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{f_kernel, memory_kernel, ReservoirModel};

    fn single_mode(v: f64, w: f64, grid: TimeGrid) -> KernelSeries {
        memory_kernel(
            &ReservoirModel::DiscreteModes {
                modes: vec![(w, Complex64::new(v, 0.0))],
            },
            grid,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_is_a_pure_phase() {
        let grid = TimeGrid::new(0.2, 1000).unwrap();
        let sol = solve_u(&KernelSeries::zeros(grid), 1.0, grid).unwrap();
        for j in 0..grid.len() {
            let want = Complex64::from_polar(1.0, -grid.t(j));
            assert!((sol.u[j] - want).norm() < 1e-12);
            assert!((sol.u[j].norm() - 1.0).abs() < 1e-12);
            let w = logarithmic_derivative(&sol, j).unwrap();
            assert!((w + I).norm() < 1e-12);
        }
    }

    #[test]
    fn resonant_mode_gives_cosine() {
        let v = 0.05;
        let grid = TimeGrid::new(0.05, 2000).unwrap();
        let sol = solve_u(&single_mode(v, 1.0, grid), 1.0, grid).unwrap();
        let err = (0..grid.len())
            .map(|j| {
                let t = grid.t(j);
                (sol.u[j] - Complex64::from_polar((v * t).cos(), -t)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "err {err}");
    }

    #[test]
    fn resonant_zero_is_flagged() {
        // Exact two-mode solution sampled so that V t = π/2 lands on node 1000.
        let v = std::f64::consts::FRAC_PI_2 / 100.0;
        let grid = TimeGrid::new(0.1, 1500).unwrap();
        let u: Vec<Complex64> = grid
            .times()
            .map(|t| Complex64::from_polar((v * t).cos(), -t))
            .collect();
        let sol = PropagatorSolution {
            grid,
            omega_c: 1.0,
            zero_flags: flag_zeros(&u),
            u_dot: vec![Complex64::new(1.0, 0.0); grid.len()],
            u,
        };
        assert!(sol.zero_flags[1000]);
        assert_eq!(sol.zero_flags.iter().filter(|f| **f).count(), 1);
        assert!(logarithmic_derivative(&sol, 1000).is_none());
        assert!(logarithmic_derivative(&sol, 999).is_some());
    }

    #[test]
    fn second_order_convergence() {
        let v = 0.05;
        let err = |dt: f64| {
            let grid = TimeGrid::with_t_max(dt, 200.0).unwrap();
            let sol = solve_u(&single_mode(v, 1.0, grid), 1.0, grid).unwrap();
            (0..grid.len())
                .map(|j| {
                    let t = grid.t(j);
                    (sol.u[j] - Complex64::from_polar((v * t).cos(), -t)).norm()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(0.4) / err(0.2);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn derivative_matches_recomputed_rhs() {
        let grid = TimeGrid::new(0.2, 2000).unwrap();
        let g = memory_kernel(&ReservoirModel::crow(1.0, 0.025, 2.0).unwrap(), grid).unwrap();
        let sol = solve_u(&g, 1.0, grid).unwrap();
        for j in 0..grid.len() {
            let rhs = -I * sol.u[j] - trapezoid_convolution(&g.values, &sol.u, j, grid.dt());
            assert!((rhs - sol.u_dot[j]).norm() < 1e-12, "node {j}");
        }
    }

    #[test]
    fn modulus_stays_bounded_and_damps_at_weak_coupling() {
        let grid = TimeGrid::new(0.2, 10_000).unwrap();
        for eta in [0.4, 1.2, 2.0] {
            let g = memory_kernel(&ReservoirModel::crow(1.0, 0.025, eta).unwrap(), grid).unwrap();
            let sol = solve_u(&g, 1.0, grid).unwrap();
            assert!(sol.u.iter().all(|v| v.norm() <= 1.0 + 1e-6));
            if eta == 0.4 {
                for j in 1..200 {
                    assert!(logarithmic_derivative(&sol, j).unwrap().re < 0.0);
                }
            }
            if eta == 2.0 {
                // Persistent oscillation: |u| stays well away from zero on
                // average over the last quarter.
                let tail = &sol.u[7500..];
                let mean = tail.iter().map(|v| v.norm()).sum::<f64>() / tail.len() as f64;
                assert!(mean > 0.1, "mean {mean}");
            }
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let grid = TimeGrid::new(5.0, 100).unwrap();
        let r = solve_u(&single_mode(2.0, 1.0, grid), 1.0, grid);
        assert!(matches!(r, Err(Error::StepRejected { .. })));
    }

    #[test]
    fn f_vanishes_without_coupling_and_starts_linearly() {
        let grid = TimeGrid::new(1e-3, 10).unwrap();
        let m = ReservoirModel::crow(1.0, 0.025, 2.0).unwrap();
        let sol = solve_u(&memory_kernel(&m, grid).unwrap(), 1.0, grid).unwrap();
        let h = f_kernel(&m, grid).unwrap();
        let f = compute_f(&h, &sol).unwrap();
        assert_eq!(f.f[0], Complex64::new(0.0, 0.0));
        assert_eq!(f.f_dot[0], h.values[0]);
        let slope = 0.05 * (std::f64::consts::PI / 2.0).sqrt();
        assert!((f.f[1] / (slope * 1e-3) - 1.0).norm() < 2e-3);

        let zero = compute_f(&KernelSeries::zeros(grid), &sol).unwrap();
        assert!(zero.f.iter().chain(&zero.f_dot).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = TimeGrid::new(0.2, 10).unwrap();
        let b = TimeGrid::new(0.2, 11).unwrap();
        assert!(solve_u(&KernelSeries::zeros(a), 1.0, b).is_err());
        let sol = solve_u(&KernelSeries::zeros(a), 1.0, a).unwrap();
        assert!(compute_f(&KernelSeries::zeros(b), &sol).is_err());
    }
}
