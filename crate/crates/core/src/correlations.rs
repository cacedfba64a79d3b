//! Initial-state preparations and the correlation functions they induce.
//!
//! With `a(t) = u(t) a(0) + f(t)` and `f(t)` linear in the reservoir modes,
//! the cavity moments depend on `ν₁ = ⟨a†(0) f(t)⟩`, `ν₂ = ⟨a(0) f(t)⟩`,
//! `υ₀ = ⟨f(t)⟩`, `υ₁ = ⟨f†(t) f(t)⟩` and `υ₂ = ⟨f(t) f(t)⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::oracle::{ChainHamiltonian, GaussianMoments};
use crate::propagator::{ConvolutionSeries, PropagatorSolution};
use crate::reservoir::{KernelSeries, Occupation};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cavity moments at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityInit {
    pub mean: Complex64,
    pub n0: f64,
    pub s0: Complex64,
}

impl CavityInit {
    pub fn vacuum() -> Self {
        Self {
            mean: ZERO,
            n0: 0.0,
            s0: ZERO,
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialStateSpec {
    /// Product of a Gaussian cavity state and a reservoir in a (possibly
    /// frequency-dependent) thermal state.
    UncorrelatedThermal {
        occupation: Occupation,
        cavity: CavityInit,
    },
    /// Cavity and first resonator in a two-mode squeezed vacuum.
    SqueezedVacuumCorrelated { r_s: f64, theta_s: f64 },
    /// Two thermal modes mixed on a beam splitter of angle `vartheta`.
    BeamSplitterThermal {
        vartheta: f64,
        nbar_a: f64,
        nbar_b1: f64,
    },
}

impl InitialStateSpec {
    pub fn cavity(&self) -> CavityInit {
        match self {
            InitialStateSpec::UncorrelatedThermal { cavity, .. } => *cavity,
            InitialStateSpec::SqueezedVacuumCorrelated { r_s, .. } => CavityInit {
                mean: ZERO,
                n0: r_s.sinh().powi(2),
                s0: ZERO,
            },
            InitialStateSpec::BeamSplitterThermal {
                vartheta,
                nbar_a,
                nbar_b1,
            } => CavityInit {
                mean: ZERO,
                n0: 0.5 * (nbar_a + nbar_b1 + (nbar_a - nbar_b1) * vartheta.cos()),
                s0: ZERO,
            },
        }
    }

    /// Occupation of the first resonator after the beam splitter.
    fn resonator_occupation(vartheta: f64, nbar_a: f64, nbar_b1: f64) -> f64 {
        0.5 * (nbar_a + nbar_b1 - (nbar_a - nbar_b1) * vartheta.cos())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialStateSpec::UncorrelatedThermal { cavity, occupation } => {
                let CavityInit { mean, n0, s0 } = *cavity;
                if !(n0.is_finite() && n0 >= 0.0) {
                    return Err(Error::InvalidState(format!("n0 must be >= 0, got {n0}")));
                }
                if mean.norm_sqr() > n0 * (1.0 + 1e-12) {
                    return Err(Error::InvalidState(format!(
                        "|<a(0)>|^2 = {} exceeds n0 = {n0}",
                        mean.norm_sqr()
                    )));
                }
                if n0 + 0.5 < s0.norm() {
                    return Err(Error::InvalidState(format!(
                        "n0 + 1/2 = {} is below |s0| = {}",
                        n0 + 0.5,
                        s0.norm()
                    )));
                }
                if let Occupation::Constant(c) = occupation {
                    if *c < 0.0 {
                        return Err(Error::NegativeOccupation {
                            omega: f64::NAN,
                            value: *c,
                        });
                    }
                }
            }
            InitialStateSpec::SqueezedVacuumCorrelated { r_s, theta_s } => {
                if !(r_s.is_finite() && *r_s >= 0.0) || !theta_s.is_finite() {
                    return Err(Error::InvalidState(format!(
                        "need r_s >= 0 and finite theta_s, got r_s = {r_s}, theta_s = {theta_s}"
                    )));
                }
            }
            InitialStateSpec::BeamSplitterThermal {
                vartheta,
                nbar_a,
                nbar_b1,
            } => {
                if !vartheta.is_finite() {
                    return Err(Error::InvalidState(format!("vartheta must be finite, got {vartheta}")));
                }
                for (name, v) in [("nbar_a", nbar_a), ("nbar_b1", nbar_b1)] {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(Error::InvalidState(format!("{name} must be >= 0, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunctions {
    pub grid: TimeGrid,
    pub nu1: Vec<Complex64>,
    pub nu2: Vec<Complex64>,
    pub v0: Vec<Complex64>,
    pub v1: Vec<f64>,
    pub v2: Vec<Complex64>,
    pub nu1_dot: Vec<Complex64>,
    pub nu2_dot: Vec<Complex64>,
    pub v1_dot: Vec<f64>,
    pub v2_dot: Vec<Complex64>,
}

impl CorrelationFunctions {
    fn zeros(grid: TimeGrid) -> Self {
        let c = vec![ZERO; grid.len()];
        let r = vec![0.0; grid.len()];
        Self {
            grid,
            nu1: c.clone(),
            nu2: c.clone(),
            v0: c.clone(),
            v1: r.clone(),
            v2: c.clone(),
            nu1_dot: c.clone(),
            nu2_dot: c.clone(),
            v1_dot: r,
            v2_dot: c,
        }
    }
}

pub fn correlation_functions(
    spec: &InitialStateSpec,
    sol: &PropagatorSolution,
    conv: &ConvolutionSeries,
    gtilde: &KernelSeries,
) -> Result<CorrelationFunctions> {
    spec.validate()?;
    let grid = sol.grid;
    for (what, g, len) in [
        ("F series", conv.grid, conv.f.len()),
        ("thermal kernel", gtilde.grid, gtilde.values.len()),
    ] {
        if g != grid || len != grid.len() {
            return Err(Error::GridMismatch {
                what,
                found: len,
                expected: grid.len(),
            });
        }
    }
    let mut c = CorrelationFunctions::zeros(grid);
    match spec {
        InitialStateSpec::UncorrelatedThermal { .. } => {
            let (v1, v1_dot) = thermal_noise(&sol.u, &gtilde.values, grid.dt());
            c.v1 = v1;
            c.v1_dot = v1_dot;
        }
        InitialStateSpec::SqueezedVacuumCorrelated { r_s, theta_s } => {
            // ν₂ = -i k F with k = sinh(2r) e^{iθ} / √(2π).
            let k = Complex64::from_polar((2.0 * r_s).sinh() / (2.0 * PI).sqrt(), *theta_s);
            let a = 2.0 / PI * r_s.sinh().powi(2);
            for j in 0..grid.len() {
                let (f, fd) = (conv.f[j], conv.f_dot[j]);
                c.nu2[j] = -I * k * f;
                c.nu2_dot[j] = -I * k * fd;
                c.v1[j] = a * f.norm_sqr();
                c.v1_dot[j] = 2.0 * a * (f.conj() * fd).re;
            }
        }
        InitialStateSpec::BeamSplitterThermal {
            vartheta,
            nbar_a,
            nbar_b1,
        } => {
            let k = (nbar_a - nbar_b1) * vartheta.sin() / (2.0 * PI).sqrt();
            let nb1 = InitialStateSpec::resonator_occupation(*vartheta, *nbar_a, *nbar_b1);
            let a = 2.0 * nb1 / PI;
            for j in 0..grid.len() {
                let (f, fd) = (conv.f[j], conv.f_dot[j]);
                c.nu1[j] = -I * k * f;
                c.nu1_dot[j] = -I * k * fd;
                c.v1[j] = a * f.norm_sqr();
                c.v1_dot[j] = 2.0 * a * (f.conj() * fd).re;
            }
        }
    }
    Ok(c)
}

/// `υ₁(t) = ∬₀ᵗ u*(s) g̃(s-s') u(s') ds ds'` and its derivative
/// `2 Re[u*(t) ∫₀ᵗ g̃(t-s) u(s) ds]`, both with trapezoid weights.
///
/// The double sum is a Hermitian form `v† A v` with `A_kl = g̃(t_k - t_l)`;
/// moving from `t_n` to `t_{n+1}` changes `v` only in entries `n, n+1`, so
/// each step costs two running convolutions.
fn thermal_noise(u: &[Complex64], g: &[Complex64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let mut v1 = vec![0.0; n];
    let mut v1_dot = vec![0.0; n];
    // v holds the trapezoid-weighted samples w_k u_k of the current interval.
    let mut v = vec![ZERO; n];
    let mut form = 0.0;
    let g0 = g[0].re;
    let g1 = if n > 1 { g[1] } else { ZERO };
    for step in 0..n - 1 {
        let (m, m1) = (step, step + 1);
        let mut av_m = ZERO;
        let mut av_m1 = ZERO;
        for l in 0..=m {
            av_m += g[m - l] * v[l];
            av_m1 += g[m1 - l] * v[l];
        }
        if m > 0 {
            v1_dot[m] = 2.0 * (u[m].conj() * av_m).re * dt;
        }
        let d_m = 0.5 * u[m];
        let d_m1 = 0.5 * u[m1];
        let cross = 2.0 * (d_m.conj() * av_m + d_m1.conj() * av_m1).re;
        let self_term = (d_m.norm_sqr() + d_m1.norm_sqr()) * g0
            + 2.0 * (d_m.conj() * g1.conj() * d_m1).re;
        form += cross + self_term;
        v[m] += d_m;
        v[m1] += d_m1;
        v1[m1] = (form * dt * dt).max(0.0);
    }
    // Derivative at the last node.
    let last = n - 1;
    if last > 0 {
        let av: Complex64 = (0..=last).map(|l| g[last - l] * v[l]).sum();
        v1_dot[last] = 2.0 * (u[last].conj() * av).re * dt;
    }
    (v1, v1_dot)
}

/// Site-basis second moments of cavity and chain at `t = 0`.
pub fn initial_chain_moments(spec: &InitialStateSpec, chain: &ChainHamiltonian) -> Result<GaussianMoments> {
    spec.validate()?;
    let size = chain.size();
    let mut g = GaussianMoments::vacuum(size);
    let re = |x: f64| Complex64::new(x, 0.0);
    match spec {
        InitialStateSpec::SqueezedVacuumCorrelated { r_s, theta_s } => {
            let c = r_s.sinh().powi(2);
            let x = Complex64::from_polar(0.5 * (2.0 * r_s).sinh(), *theta_s);
            g.m[(0, 0)] = re(c);
            if size > 1 {
                g.m[(1, 1)] = re(c);
                g.s[(0, 1)] = x;
                g.s[(1, 0)] = x;
            }
        }
        InitialStateSpec::BeamSplitterThermal {
            vartheta,
            nbar_a,
            nbar_b1,
        } => {
            g.m[(0, 0)] = re(spec.cavity().n0);
            if size > 1 {
                g.m[(1, 1)] = re(InitialStateSpec::resonator_occupation(*vartheta, *nbar_a, *nbar_b1));
                let x = re(0.5 * vartheta.sin() * (nbar_a - nbar_b1));
                g.m[(0, 1)] = x;
                g.m[(1, 0)] = x.conj();
            }
        }
        InitialStateSpec::UncorrelatedThermal { occupation, cavity } => {
            g.mean[0] = cavity.mean;
            g.m[(0, 0)] = re(cavity.n0);
            g.s[(0, 0)] = cavity.s0;
            let sites = chain.sites;
            if sites > 0 && !occupation.is_zero() {
                // Thermal state of the open chain in its standing-wave eigenbasis.
                let norm = 2.0 / (sites + 1) as f64;
                let modes: Vec<(f64, f64)> = (1..=sites)
                    .map(|m| {
                        let k = PI * m as f64 / (sites + 1) as f64;
                        let w = chain.omega0 - 2.0 * chain.lambda0 * k.cos();
                        (k, occupation.eval(w))
                    })
                    .collect();
                if let Some((k, nb)) = modes.iter().find(|(_, nb)| *nb < 0.0 || !nb.is_finite()) {
                    return Err(Error::NegativeOccupation {
                        omega: chain.omega0 - 2.0 * chain.lambda0 * k.cos(),
                        value: *nb,
                    });
                }
                for i in 1..=sites {
                    for j in i..=sites {
                        let x: f64 = modes
                            .iter()
                            .map(|(k, nb)| norm * (i as f64 * k).sin() * (j as f64 * k).sin() * nb)
                            .sum();
                        g.m[(i, j)] = re(x);
                        g.m[(j, i)] = re(x);
                    }
                }
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_f, ChainPropagator};
    use crate::propagator::{compute_f, solve_u};
    use crate::reservoir::{f_kernel, memory_kernel, thermal_kernel, ReservoirModel};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    struct Setup {
        sol: PropagatorSolution,
        conv: ConvolutionSeries,
        model: ReservoirModel,
    }

    fn setup(eta: f64, grid: TimeGrid) -> Setup {
        let model = ReservoirModel::crow(1.0, 0.025, eta).unwrap();
        let sol = solve_u(&memory_kernel(&model, grid).unwrap(), 1.0, grid).unwrap();
        let conv = compute_f(&f_kernel(&model, grid).unwrap(), &sol).unwrap();
        Setup { sol, conv, model }
    }

    fn squeezed(r: f64) -> InitialStateSpec {
        InitialStateSpec::SqueezedVacuumCorrelated { r_s: r, theta_s: 0.0 }
    }

    fn splitter() -> InitialStateSpec {
        InitialStateSpec::BeamSplitterThermal {
            vartheta: PI / 2.0,
            nbar_a: 6.0,
            nbar_b1: 0.0,
        }
    }

    #[test]
    fn vacuum_reservoir_gives_nothing() {
        let grid = TimeGrid::new(0.2, 2000).unwrap();
        let s = setup(1.2, grid);
        let spec = InitialStateSpec::UncorrelatedThermal {
            occupation: Occupation::Zero,
            cavity: CavityInit { mean: Complex64::new(0.3, 0.1), n0: 1.0, s0: Complex64::new(0.2, 0.0) },
        };
        let c = correlation_functions(&spec, &s.sol, &s.conv, &KernelSeries::zeros(grid)).unwrap();
        assert_eq!(c, CorrelationFunctions::zeros(grid));
    }

    #[test]
    fn squeezed_closed_form_prefactor() {
        let grid = TimeGrid::new(0.2, 1000).unwrap();
        let s = setup(2.0, grid);
        let c = correlation_functions(&squeezed(1.0), &s.sol, &s.conv, &KernelSeries::zeros(grid)).unwrap();
        let k = 2.0_f64.sinh() / (2.0 * PI).sqrt();
        assert_relative_eq!(2.0_f64.sinh(), 3.626860407847019, epsilon = 1e-12);
        for j in 0..grid.len() {
            assert!((c.nu2[j] - Complex64::new(0.0, -k) * s.conv.f[j]).norm() < 1e-15);
            assert_eq!(c.nu1[j], ZERO);
            assert_eq!(c.v2[j], ZERO);
            assert_eq!(c.v0[j], ZERO);
        }
        assert_eq!(c.v1[0], 0.0);
        assert_eq!(c.nu2[0], ZERO);
    }

    #[test]
    fn beam_splitter_preset_numbers() {
        let spec = splitter();
        let cav = spec.cavity();
        assert_relative_eq!(cav.n0, 3.0, epsilon = 1e-15);
        assert_relative_eq!(InitialStateSpec::resonator_occupation(PI / 2.0, 6.0, 0.0), 3.0, epsilon = 1e-15);
        let grid = TimeGrid::new(0.2, 500).unwrap();
        let s = setup(0.4, grid);
        let c = correlation_functions(&spec, &s.sol, &s.conv, &KernelSeries::zeros(grid)).unwrap();
        let k = 6.0 / (2.0 * PI).sqrt();
        for j in 0..grid.len() {
            assert!((c.nu1[j] - Complex64::new(0.0, -k) * s.conv.f[j]).norm() < 1e-14);
            assert!((c.v1[j] - 6.0 / PI * s.conv.f[j].norm_sqr()).abs() < 1e-15);
            assert_eq!(c.nu2[j], ZERO);
        }
    }

    #[test]
    fn chain_moments_for_presets() {
        let chain = ChainHamiltonian { omega_c: 1.0, omega0: 1.0, lambda0: 0.025, lambda: 0.03, sites: 10 };
        let vac = initial_chain_moments(&squeezed(0.0), &chain).unwrap();
        assert_eq!(vac, GaussianMoments::vacuum(11));

        let sq = initial_chain_moments(&squeezed(1.0), &chain).unwrap();
        assert_relative_eq!(sq.m[(0, 0)].re, 1.1752011936438014_f64.powi(2), epsilon = 1e-12);
        assert_relative_eq!(sq.m[(0, 0)].re, 1.3810978455418157, epsilon = 1e-12);
        assert_relative_eq!(sq.s[(0, 1)].norm(), 1.8134302039235095, epsilon = 1e-12);
        let (m, x) = (sq.m[(0, 0)].re, sq.s[(0, 1)].norm_sqr());
        assert!(m * (m + 1.0) >= x - 1e-12);
        assert!(sq.min_eigenvalue() > -1e-12);

        let bs = initial_chain_moments(&splitter(), &chain).unwrap();
        for (i, j) in [(0, 0), (1, 1), (0, 1), (1, 0)] {
            assert!((bs.m[(i, j)] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        }
        assert!(bs.s.iter().all(|x| *x == ZERO));
        assert!(bs.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn constant_occupation_chain_block_is_diagonal() {
        let chain = ChainHamiltonian { omega_c: 1.0, omega0: 1.0, lambda0: 0.025, lambda: 0.03, sites: 12 };
        let spec = InitialStateSpec::UncorrelatedThermal {
            occupation: Occupation::Constant(0.8),
            cavity: CavityInit { mean: ZERO, n0: 0.5, s0: ZERO },
        };
        let g = initial_chain_moments(&spec, &chain).unwrap();
        for i in 1..=12 {
            for j in 1..=12 {
                let want = if i == j { 0.8 } else { 0.0 };
                assert!((g.m[(i, j)].re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_noise_matches_chain_transport() {
        let grid = TimeGrid::new(0.5, 1200).unwrap();
        let s = setup(1.2, grid);
        let occ = Occupation::Thermal { temperature: 1.0 };
        let gt = thermal_kernel(&s.model, &occ, grid).unwrap();
        let spec = InitialStateSpec::UncorrelatedThermal { occupation: occ, cavity: CavityInit::vacuum() };
        let c = correlation_functions(&spec, &s.sol, &s.conv, &gt).unwrap();
        let chain = ChainHamiltonian { omega_c: 1.0, omega0: 1.0, lambda0: 0.025, lambda: 0.03, sites: 60 };
        let prop = ChainPropagator::new(chain).unwrap();
        let init = initial_chain_moments(&spec, &chain).unwrap();
        let oracle = crate::oracle::oracle_moments(&prop, &init, grid).unwrap();
        let scale = c.v1.iter().cloned().fold(0.0, f64::max);
        assert!(scale > 0.1);
        for j in 0..grid.len() {
            assert!((c.v1[j] - oracle.n[j]).abs() < 1e-3 * scale, "node {j}");
            assert!(c.v1[j] >= 0.0);
        }
    }

    /// Largest second difference of a sampled series, divided by dt².
    fn max_second_derivative<T>(x: &[T], dt: f64, norm: impl Fn(T) -> f64) -> f64
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    {
        (1..x.len() - 1)
            .map(|j| norm(x[j + 1] - x[j] - (x[j] - x[j - 1])) / (dt * dt))
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivatives_match_central_differences() {
        let grid = TimeGrid::new(0.2, 4000).unwrap();
        let s = setup(2.0, grid);
        let dt = grid.dt();
        let occ = Occupation::Custom(Arc::new(|w: f64| 1.0 + (w - 1.0) * 10.0));
        let gt = thermal_kernel(&s.model, &occ, grid).unwrap();
        let specs = [
            squeezed(1.0),
            splitter(),
            InitialStateSpec::UncorrelatedThermal { occupation: occ, cavity: CavityInit::vacuum() },
        ];
        for spec in specs {
            let c = correlation_functions(&spec, &s.sol, &s.conv, &gt).unwrap();
            let tol = 10.0 * dt * dt * max_second_derivative(&c.v1, dt, f64::abs);
            for j in 1..grid.len() - 1 {
                let fd = (c.v1[j + 1] - c.v1[j - 1]) / (2.0 * dt);
                assert!((fd - c.v1_dot[j]).abs() <= tol, "{spec:?} node {j}");
            }
            // ν's carry the carrier e^{-iω₀t}; compare in the co-rotating frame.
            for (x, xd) in [(&c.nu1, &c.nu1_dot), (&c.nu2, &c.nu2_dot)] {
                let rx: Vec<Complex64> =
                    (0..grid.len()).map(|j| x[j] * Complex64::from_polar(1.0, grid.t(j))).collect();
                let tol = 10.0 * dt * dt * max_second_derivative(&rx, dt, |z| z.norm());
                for j in 1..grid.len() - 1 {
                    let fd = (rx[j + 1] - rx[j - 1]) / (2.0 * dt);
                    let want = (xd[j] + I * x[j]) * Complex64::from_polar(1.0, grid.t(j));
                    assert!((fd - want).norm() <= tol, "{spec:?} node {j}");
                }
            }
        }
    }

    #[test]
    fn f_matches_chain_oracle() {
        let grid = TimeGrid::new(0.2, 10_000).unwrap();
        for eta in [0.4, 1.2, 2.0] {
            let s = setup(eta, grid);
            let chain = ChainHamiltonian { omega_c: 1.0, omega0: 1.0, lambda0: 0.025, lambda: 0.025 * eta, sites: 400 };
            let f = oracle_f(&ChainPropagator::new(chain).unwrap(), grid).unwrap();
            let err = f.iter().zip(&s.conv.f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-3, "eta {eta}: {err}");
        }
    }

    #[test]
    fn discrete_mode_sum_reproduces_nu2() {
        // ν₂ = Σ_k ⟨a(0)b_k(0)⟩ f_k(t) with f_k solving ḟ_k = -iω_k f_k - i g_k u.
        let grid = TimeGrid::new(0.2, 4000).unwrap();
        let s = setup(1.2, grid);
        let c = correlation_functions(&squeezed(1.0), &s.sol, &s.conv, &KernelSeries::zeros(grid)).unwrap();
        let nk = 400;
        let dk = PI / (nk + 1) as f64;
        let lam = 0.03;
        let dt = grid.dt();
        let mut nu2 = vec![ZERO; grid.len()];
        for m in 1..=nk {
            let k = m as f64 * dk;
            let w = 1.0 - 0.05 * k.cos();
            let gk = (2.0 / PI).sqrt() * lam * k.sin();
            let corr = 1.0_f64.sinh() * 1.0_f64.cosh() * 2.0 / (2.0 * PI).sqrt() * k.sin() * dk;
            let mut fk = ZERO;
            let e = Complex64::from_polar(1.0, -w * dt);
            for j in 1..grid.len() {
                // Trapezoid in the frame rotating at ω_k.
                let a = s.sol.u[j - 1];
                let b = s.sol.u[j];
                fk = e * (fk - I * gk * 0.5 * dt * a) - I * gk * 0.5 * dt * b;
                nu2[j] += corr * fk;
            }
        }
        let err = nu2.iter().zip(&c.nu2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-3, "err {err}");
    }

    #[test]
    fn negative_parameters_are_rejected() {
        let grid = TimeGrid::new(0.2, 10).unwrap();
        let s = setup(1.0, grid);
        let z = KernelSeries::zeros(grid);
        let bad = InitialStateSpec::BeamSplitterThermal { vartheta: 0.0, nbar_a: -1.0, nbar_b1: 0.0 };
        assert!(correlation_functions(&bad, &s.sol, &s.conv, &z).is_err());
        let bad = InitialStateSpec::UncorrelatedThermal { occupation: Occupation::Constant(-0.1), cavity: CavityInit::vacuum() };
        assert!(correlation_functions(&bad, &s.sol, &s.conv, &z).is_err());
        let other = TimeGrid::new(0.2, 11).unwrap();
        assert!(correlation_functions(&squeezed(1.0), &s.sol, &s.conv, &KernelSeries::zeros(other)).is_err());
    }
}
