//! Time-convolutionless master-equation coefficients and their validation.
//!
//! The master equation is
//!
//! ```text
//! ρ̇ = −iΔ[a†a, ρ]
//!     + γ₁ (2aρa† − a†aρ − ρa†a)
//!     + γ₂ (aρa† + a†ρa − a†aρ − ρaa†)
//!     + γ₃* (2aρa − aaρ − ρaa) + γ₃ (2a†ρa† − a†a†ρ − ρa†a†)
//! ```
//!
//! and implies `d⟨a⟩/dt = −(γ₁+iΔ)⟨a⟩`, `dn/dt = −2γ₁n + γ₂`,
//! `ds/dt = −2(γ₁+iΔ)s − 2γ₃`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlations::CorrelationFunctions;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::observables::{squeezing_decomposition, ObservableTrajectory};
use crate::propagator::{logarithmic_derivative, PropagatorSolution};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

#[derive(Debug, Clone, PartialEq)]
pub struct MasterEqCoefficients {
    pub grid: TimeGrid,
    /// Cavity frequency of the underlying propagator; used as the rotating
    /// frame in validation.
    pub omega_c: f64,
    pub delta: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub gamma3: Vec<Complex64>,
    pub valid_flags: Vec<bool>,
}

pub fn extract_coefficients(
    sol: &PropagatorSolution,
    corr: &CorrelationFunctions,
) -> Result<MasterEqCoefficients> {
    let n = sol.grid.len();
    if corr.grid != sol.grid {
        return Err(Error::GridMismatch {
            what: "correlation functions",
            found: corr.grid.len(),
            expected: n,
        });
    }
    for (name, len) in [
        ("nu1_dot", corr.nu1_dot.len()),
        ("nu2_dot", corr.nu2_dot.len()),
        ("v1_dot", corr.v1_dot.len()),
        ("v2_dot", corr.v2_dot.len()),
    ] {
        if len != n {
            return Err(Error::MissingDerivative(name));
        }
    }
    let mut c = MasterEqCoefficients {
        grid: sol.grid,
        omega_c: sol.omega_c,
        delta: vec![f64::NAN; n],
        gamma1: vec![f64::NAN; n],
        gamma2: vec![f64::NAN; n],
        gamma3: vec![NAN; n],
        valid_flags: vec![false; n],
    };
    for j in 0..n {
        let Some(w) = logarithmic_derivative(sol, j) else {
            continue;
        };
        let (u, ud) = (sol.u[j], sol.u_dot[j]);
        c.delta[j] = -w.im;
        c.gamma1[j] = -w.re;
        c.gamma2[j] = corr.v1_dot[j]
            + 2.0 * (u * corr.nu1_dot[j].conj() - w * (corr.v1[j] + u.conj() * corr.nu1[j])).re;
        c.gamma3[j] = -0.5 * corr.v2_dot[j] + w * corr.v2[j] - u * corr.nu2_dot[j] + ud * corr.nu2[j];
        c.valid_flags[j] = true;
    }
    Ok(c)
}

/// Residuals of the three moment equations.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentResiduals {
    /// Absolute residual per node; NaN where the node or a neighbour is flagged
    /// or at the grid ends.
    pub mean: Vec<f64>,
    pub n: Vec<f64>,
    pub s: Vec<f64>,
    /// Largest residual divided by the largest slope, per equation.
    pub max_relative_mean: f64,
    pub max_relative_n: f64,
    pub max_relative_s: f64,
    /// Number of nodes that entered the statistics.
    pub nodes_used: usize,
}

impl MomentResiduals {
    pub fn max_relative(&self) -> f64 {
        self.max_relative_mean
            .max(self.max_relative_n)
            .max(self.max_relative_s)
    }
}

fn relative(res: &[f64], slope: &[f64]) -> f64 {
    let r = res.iter().filter(|x| x.is_finite()).fold(0.0, |a: f64, b| a.max(*b));
    let s = slope.iter().fold(0.0, |a: f64, b| a.max(*b));
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

/// Central-difference residuals of the moment equations, evaluated in the
/// frame rotating at `omega_c` so that the carrier phase of `⟨a⟩` and `s`
/// does not dominate the differencing error.
pub fn moment_ode_residuals(coeffs: &MasterEqCoefficients, traj: &ObservableTrajectory) -> MomentResiduals {
    let grid = coeffs.grid;
    let len = grid.len();
    let dt = grid.dt();
    let w = coeffs.omega_c;
    let rot = |j: usize, k: f64| Complex64::from_polar(1.0, k * w * grid.t(j));
    let am: Vec<Complex64> = (0..len).map(|j| traj.mean[j] * rot(j, 1.0)).collect();
    let sm: Vec<Complex64> = (0..len).map(|j| traj.s[j] * rot(j, 2.0)).collect();

    let mut out = MomentResiduals {
        mean: vec![f64::NAN; len],
        n: vec![f64::NAN; len],
        s: vec![f64::NAN; len],
        max_relative_mean: 0.0,
        max_relative_n: 0.0,
        max_relative_s: 0.0,
        nodes_used: 0,
    };
    let mut slopes = (Vec::new(), Vec::new(), Vec::new());
    for j in 1..len.saturating_sub(1) {
        if !(coeffs.valid_flags[j - 1] && coeffs.valid_flags[j] && coeffs.valid_flags[j + 1]) {
            continue;
        }
        let k = Complex64::new(coeffs.gamma1[j], coeffs.delta[j] - w);
        let g3 = coeffs.gamma3[j] * rot(j, 2.0);

        let da = (am[j + 1] - am[j - 1]) / (2.0 * dt);
        let dn = (traj.n[j + 1] - traj.n[j - 1]) / (2.0 * dt);
        let ds = (sm[j + 1] - sm[j - 1]) / (2.0 * dt);

        out.mean[j] = (da + k * am[j]).norm();
        out.n[j] = (dn + 2.0 * coeffs.gamma1[j] * traj.n[j] - coeffs.gamma2[j]).abs();
        out.s[j] = (ds + 2.0 * k * sm[j] + 2.0 * g3).norm();
        slopes.0.push(da.norm());
        slopes.1.push(dn.abs());
        slopes.2.push(ds.norm());
        out.nodes_used += 1;
    }
    out.max_relative_mean = relative(&out.mean, &slopes.0);
    out.max_relative_n = relative(&out.n, &slopes.1);
    out.max_relative_s = relative(&out.s, &slopes.2);
    out
}

/// Truncated Fock-space density matrix on levels `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    pub entries: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn fock(level: usize, n_max: usize) -> Self {
        let mut entries = DMatrix::from_element(n_max + 1, n_max + 1, ZERO);
        entries[(level, level)] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    /// Thermal state with mean occupation `nbar`, truncated and renormalised.
    pub fn thermal(nbar: f64, n_max: usize) -> Self {
        let q = nbar / (1.0 + nbar);
        let mut entries = DMatrix::from_element(n_max + 1, n_max + 1, ZERO);
        let mut p = 1.0 / (1.0 + nbar);
        for k in 0..=n_max {
            entries[(k, k)] = Complex64::new(p, 0.0);
            p *= q;
        }
        let mut rho = Self { entries };
        rho.normalize();
        rho
    }

    /// Gaussian state with the given mean, `⟨a†a⟩ = n` and `⟨aa⟩ = s`:
    /// `D(α) S(ξ) ρ_th S(ξ)† D(α)†`, built in an enlarged space, then truncated.
    pub fn gaussian(mean: Complex64, n: f64, s: Complex64, n_max: usize) -> Self {
        let nc = n - mean.norm_sqr();
        let sc = s - mean * mean;
        let sq = squeezing_decomposition(nc.max(0.0), sc);
        let big = n_max + 60;
        let a = annihilation(big);
        let ad = a.adjoint();
        let rho = Self::thermal(sq.nbar.max(0.0), big).entries;
        // ⟨aa⟩ = −e^{iφ} sinh r cosh r (2n̄+1) for S = exp(½(ξ* a² − ξ a†²)), ξ = r e^{iφ};
        // φ = θ + π gives ⟨aa⟩ = +|s| e^{iθ}.
        let xi = Complex64::from_polar(sq.r, sq.theta + std::f64::consts::PI);
        let gen = (&a * &a * xi.conj() - &ad * &ad * xi) * Complex64::new(0.5, 0.0);
        let squeeze = gen.exp();
        let disp = (&ad * mean - &a * mean.conj()).exp();
        let u = disp * squeeze;
        let full = &u * rho * u.adjoint();
        let mut out = Self {
            entries: full.view((0, 0), (n_max + 1, n_max + 1)).into_owned(),
        };
        out.normalize();
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    fn normalize(&mut self) {
        let tr = self.trace().re;
        self.entries /= Complex64::new(tr, 0.0);
    }

    pub fn mean(&self) -> Complex64 {
        (0..self.n_max())
            .map(|m| ((m + 1) as f64).sqrt() * self.entries[(m + 1, m)])
            .sum()
    }

    pub fn occupation(&self) -> f64 {
        (0..self.dim()).map(|m| m as f64 * self.entries[(m, m)].re).sum()
    }

    pub fn two_photon(&self) -> Complex64 {
        (0..self.dim().saturating_sub(2))
            .map(|m| (((m + 1) * (m + 2)) as f64).sqrt() * self.entries[(m + 2, m)])
            .sum()
    }

    pub fn top_occupation(&self) -> f64 {
        let k = self.n_max();
        self.entries[(k, k)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }
}

fn annihilation(n_max: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_element(n_max + 1, n_max + 1, ZERO);
    for m in 0..n_max {
        a[(m, m + 1)] = Complex64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    a
}

/// Options of the Fock-space validator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    /// Top-level occupation that aborts the run.
    pub breach: f64,
    /// Trace drift that triggers renormalisation.
    pub trace_tol: f64,
}

impl Default for FockOptions {
    fn default() -> Self {
        Self {
            breach: 1e-4,
            trace_tol: 1e-9,
        }
    }
}

/// Moments and diagnostics of a Fock-space run, sampled every other grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTrajectory {
    pub nodes: Vec<usize>,
    pub mean: Vec<Complex64>,
    pub n: Vec<f64>,
    pub s: Vec<Complex64>,
    pub trace: Vec<f64>,
    pub top_occupation: Vec<f64>,
    pub renormalizations: usize,
    pub initial_top_occupation: f64,
}

/// Generator coefficients in the frame rotating at `omega_c`.
#[derive(Debug, Clone, Copy)]
struct Rates {
    delta: f64,
    g1: f64,
    g2: f64,
    g3: Complex64,
}

/// `L(ρ)` written out entry by entry with truncated ladder operators.
fn generator(rho: &DMatrix<Complex64>, r: Rates, out: &mut DMatrix<Complex64>) {
    let d = rho.nrows();
    let top = d - 1;
    let sq: Vec<f64> = (0..=d + 1).map(|k| (k as f64).sqrt()).collect();
    let g3c = r.g3.conj();
    let get = |m: isize, n: isize| -> Complex64 {
        if m < 0 || n < 0 || m as usize > top || n as usize > top {
            ZERO
        } else {
            rho[(m as usize, n as usize)]
        }
    };
    for n in 0..d {
        for m in 0..d {
            let (mi, ni) = (m as isize, n as isize);
            let p = rho[(m, n)];
            let (mf, nf) = (m as f64, n as f64);
            // (aa†)_{nn} is n+1 except on the top level.
            let cn = if n == top { 0.0 } else { nf + 1.0 };
            let a_rho_ad = sq[m + 1] * sq[n + 1] * get(mi + 1, ni + 1);
            let ad_rho_a = sq[m] * sq[n] * get(mi - 1, ni - 1);
            let a_rho_a = sq[m + 1] * sq[n] * get(mi + 1, ni - 1);
            let aa_rho = sq[m + 1] * sq[m + 2] * get(mi + 2, ni);
            let rho_aa = if n >= 2 { sq[n - 1] * sq[n] * get(mi, ni - 2) } else { ZERO };
            let ad_rho_ad = sq[m] * sq[n + 1] * get(mi - 1, ni + 1);
            let adad_rho = if m >= 2 { sq[m] * sq[m - 1] * get(mi - 2, ni) } else { ZERO };
            let rho_adad = sq[n + 1] * sq[n + 2] * get(mi, ni + 2);

            out[(m, n)] = -I * r.delta * (mf - nf) * p
                + r.g1 * (2.0 * a_rho_ad - (mf + nf) * p)
                + r.g2 * (a_rho_ad + ad_rho_a - mf * p - cn * p)
                + g3c * (2.0 * a_rho_a - aa_rho - rho_aa)
                + r.g3 * (2.0 * ad_rho_ad - adad_rho - rho_adad);
        }
    }
}

/// Classic RK4 integration of the master equation in a truncated Fock space.
///
/// Each step spans two grid intervals so that the midpoint stages use the
/// coefficients at the intermediate node; no interpolation is introduced.
/// The evolution runs in the frame rotating at `omega_c`; reported moments are
/// in the lab frame.
pub fn fock_evolve(
    coeffs: &MasterEqCoefficients,
    rho0: &FockDensityMatrix,
    options: FockOptions,
) -> Result<FockTrajectory> {
    let grid = coeffs.grid;
    let w = coeffs.omega_c;
    let rates = |j: usize| -> Result<Rates> {
        if !coeffs.valid_flags[j] {
            return Err(Error::SingularNode { node: j });
        }
        Ok(Rates {
            delta: coeffs.delta[j] - w,
            g1: coeffs.gamma1[j],
            g2: coeffs.gamma2[j],
            g3: coeffs.gamma3[j] * Complex64::from_polar(1.0, 2.0 * w * grid.t(j)),
        })
    };

    let mut rho = rho0.clone();
    let initial_top = rho.top_occupation();
    if initial_top > options.breach {
        return Err(Error::TruncationBreach {
            t: 0.0,
            occupation: initial_top,
        });
    }
    let d = rho.dim();
    let mut traj = FockTrajectory {
        nodes: Vec::new(),
        mean: Vec::new(),
        n: Vec::new(),
        s: Vec::new(),
        trace: Vec::new(),
        top_occupation: Vec::new(),
        renormalizations: 0,
        initial_top_occupation: initial_top,
    };
    let record = |j: usize, rho: &FockDensityMatrix, traj: &mut FockTrajectory| {
        let t = grid.t(j);
        traj.nodes.push(j);
        traj.mean.push(rho.mean() * Complex64::from_polar(1.0, -w * t));
        traj.n.push(rho.occupation());
        traj.s.push(rho.two_photon() * Complex64::from_polar(1.0, -2.0 * w * t));
        traj.trace.push(rho.trace().re);
        traj.top_occupation.push(rho.top_occupation());
    };
    record(0, &rho, &mut traj);

    let h = 2.0 * grid.dt();
    let zero = DMatrix::from_element(d, d, ZERO);
    let (mut k1, mut k2, mut k3, mut k4) = (zero.clone(), zero.clone(), zero.clone(), zero);
    let mut j = 0;
    while j + 2 < grid.len() {
        let (r0, r1, r2) = (rates(j)?, rates(j + 1)?, rates(j + 2)?);
        generator(&rho.entries, r0, &mut k1);
        let y = &rho.entries + &k1 * Complex64::new(0.5 * h, 0.0);
        generator(&y, r1, &mut k2);
        let y = &rho.entries + &k2 * Complex64::new(0.5 * h, 0.0);
        generator(&y, r1, &mut k3);
        let y = &rho.entries + &k3 * Complex64::new(h, 0.0);
        generator(&y, r2, &mut k4);
        let two = Complex64::new(2.0, 0.0);
        rho.entries += (&k1 + &k2 * two + &k3 * two + &k4) * Complex64::new(h / 6.0, 0.0);
        j += 2;

        let t = grid.t(j);
        if rho.entries.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        if (rho.trace().re - 1.0).abs() > options.trace_tol {
            rho.normalize();
            traj.renormalizations += 1;
        }
        let top = rho.top_occupation();
        if top.abs() > options.breach {
            return Err(Error::TruncationBreach { t, occupation: top });
        }
        record(j, &rho, &mut traj);
    }
    Ok(traj)
}

/// Largest deviation between Fock-space moments and the closed-form trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockComparison {
    pub mean: f64,
    pub n: f64,
    pub s: f64,
}

impl FockComparison {
    pub fn max(&self) -> f64 {
        self.mean.max(self.n).max(self.s)
    }
}

pub fn compare_fock(fock: &FockTrajectory, traj: &ObservableTrajectory) -> FockComparison {
    let mut c = FockComparison {
        mean: 0.0,
        n: 0.0,
        s: 0.0,
    };
    for (i, &j) in fock.nodes.iter().enumerate() {
        c.mean = c.mean.max((fock.mean[i] - traj.mean[j]).norm());
        c.n = c.n.max((fock.n[i] - traj.n[j]).abs());
        c.s = c.s.max((fock.s[i] - traj.s[j]).norm());
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{correlation_functions, CavityInit, InitialStateSpec};
    use crate::observables::evolve_observables;
    use crate::propagator::{compute_f, solve_u};
    use crate::reservoir::{f_kernel, memory_kernel, thermal_kernel, KernelSeries, Occupation, ReservoirModel};

    struct Run {
        sol: PropagatorSolution,
        coeffs: MasterEqCoefficients,
        traj: ObservableTrajectory,
    }

    fn run(spec: &InitialStateSpec, model: &ReservoirModel, grid: TimeGrid, gtilde: Option<KernelSeries>) -> Run {
        let g = memory_kernel(model, grid).unwrap();
        let sol = solve_u(&g, 1.0, grid).unwrap();
        let h = match model {
            ReservoirModel::Crow { .. } => f_kernel(model, grid).unwrap(),
            _ => KernelSeries::zeros(grid),
        };
        let conv = compute_f(&h, &sol).unwrap();
        let gt = gtilde.unwrap_or_else(|| KernelSeries::zeros(grid));
        let corr = correlation_functions(spec, &sol, &conv, &gt).unwrap();
        let coeffs = extract_coefficients(&sol, &corr).unwrap();
        let traj = evolve_observables(&sol, &corr, spec).unwrap();
        Run { sol, coeffs, traj }
    }

    fn crow(eta: f64) -> ReservoirModel {
        ReservoirModel::crow(1.0, 0.025, eta).unwrap()
    }

    fn decoupled() -> ReservoirModel {
        ReservoirModel::crow(1.0, 0.025, 0.0).unwrap()
    }

    fn cavity(n0: f64) -> InitialStateSpec {
        InitialStateSpec::UncorrelatedThermal {
            occupation: Occupation::Zero,
            cavity: CavityInit { mean: ZERO, n0, s0: ZERO },
        }
    }

    #[test]
    fn decoupled_coefficients() {
        let grid = TimeGrid::new(0.2, 500).unwrap();
        let r = run(&cavity(2.0), &decoupled(), grid, None);
        for j in 0..grid.len() {
            assert!((r.coeffs.delta[j] - 1.0).abs() < 1e-10);
            assert!(r.coeffs.gamma1[j].abs() < 1e-10);
            assert!(r.coeffs.gamma2[j].abs() < 1e-10);
            assert!(r.coeffs.gamma3[j].norm() < 1e-10);
            assert!(r.coeffs.valid_flags[j]);
        }
        let res = moment_ode_residuals(&r.coeffs, &r.traj);
        assert!(res.n.iter().filter(|x| x.is_finite()).all(|x| *x < 1e-10));
    }

    #[test]
    fn thermal_reduction() {
        let grid = TimeGrid::new(0.2, 3000).unwrap();
        let m = crow(1.2);
        let occ = Occupation::Thermal { temperature: 1.0 };
        let gt = thermal_kernel(&m, &occ, grid).unwrap();
        let spec = InitialStateSpec::UncorrelatedThermal { occupation: occ, cavity: CavityInit::vacuum() };
        let r = run(&spec, &m, grid, Some(gt.clone()));
        let corr = correlation_functions(&spec, &r.sol, &compute_f(&f_kernel(&m, grid).unwrap(), &r.sol).unwrap(), &gt).unwrap();
        for j in 0..grid.len() {
            if !r.coeffs.valid_flags[j] {
                continue;
            }
            assert!(r.coeffs.gamma3[j].norm() <= 1e-10);
            let w = r.sol.u_dot[j] / r.sol.u[j];
            let want = corr.v1_dot[j] - 2.0 * w.re * corr.v1[j];
            assert!((r.coeffs.gamma2[j] - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn squeezed_gamma3_has_two_terms() {
        let grid = TimeGrid::new(0.2, 1000).unwrap();
        let m = crow(1.2);
        let spec = InitialStateSpec::SqueezedVacuumCorrelated { r_s: 1.0, theta_s: 0.0 };
        let sol = solve_u(&memory_kernel(&m, grid).unwrap(), 1.0, grid).unwrap();
        let conv = compute_f(&f_kernel(&m, grid).unwrap(), &sol).unwrap();
        let corr = correlation_functions(&spec, &sol, &conv, &KernelSeries::zeros(grid)).unwrap();
        let c = extract_coefficients(&sol, &corr).unwrap();
        for j in 1..grid.len() {
            let want = -sol.u[j] * corr.nu2_dot[j] + sol.u_dot[j] * corr.nu2[j];
            assert!((c.gamma3[j] - want).norm() < 1e-15);
            assert!(c.gamma3[j].norm() > 0.0);
        }
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let grid = TimeGrid::new(0.2, 10).unwrap();
        let sol = solve_u(&KernelSeries::zeros(grid), 1.0, grid).unwrap();
        let conv = compute_f(&KernelSeries::zeros(grid), &sol).unwrap();
        let mut corr = correlation_functions(&cavity(1.0), &sol, &conv, &KernelSeries::zeros(grid)).unwrap();
        corr.v1_dot.clear();
        assert!(matches!(extract_coefficients(&sol, &corr), Err(Error::MissingDerivative("v1_dot"))));
    }

    #[test]
    fn flagged_nodes_are_excluded() {
        let grid = TimeGrid::new(0.2, 100).unwrap();
        let mut r = run(&cavity(1.0), &crow(1.0), grid, None);
        r.coeffs.valid_flags[50] = false;
        let res = moment_ode_residuals(&r.coeffs, &r.traj);
        for j in 49..=51 {
            assert!(res.n[j].is_nan());
        }
        assert_eq!(res.nodes_used, grid.len() - 2 - 3);
    }

    #[test]
    fn moment_equations_hold_for_squeezed_preset() {
        let grid = TimeGrid::new(0.2, 10_000).unwrap();
        let spec = InitialStateSpec::SqueezedVacuumCorrelated { r_s: 1.0, theta_s: 0.0 };
        let r = run(&spec, &crow(0.4), grid, None);
        let res = moment_ode_residuals(&r.coeffs, &r.traj);
        assert!(res.max_relative() < 1e-3, "{res:?}");
    }

    #[test]
    fn fock_states() {
        let rho = FockDensityMatrix::fock(1, 5);
        assert_eq!(rho.occupation(), 1.0);
        let th = FockDensityMatrix::thermal(1.5, 80);
        assert!((th.occupation() - 1.5).abs() < 1e-10);
        assert!((th.trace().re - 1.0).abs() < 1e-14);
        let mean = Complex64::new(0.4, -0.2);
        let s = Complex64::from_polar(0.6, 0.7);
        let g = FockDensityMatrix::gaussian(mean, 1.3, s, 60);
        assert!((g.mean() - mean).norm() < 1e-9);
        assert!((g.occupation() - 1.3).abs() < 1e-9);
        assert!((g.two_photon() - s).norm() < 1e-9);
        assert!(g.hermiticity_error() < 1e-12);
    }

    #[test]
    fn decoupled_fock_state_is_stationary() {
        let grid = TimeGrid::new(0.2, 400).unwrap();
        let r = run(&cavity(1.0), &decoupled(), grid, None);
        let f = fock_evolve(&r.coeffs, &FockDensityMatrix::fock(1, 6), FockOptions::default()).unwrap();
        assert!(f.n.iter().all(|n| (n - 1.0).abs() < 1e-12));
        assert_eq!(f.renormalizations, 0);
    }

    #[test]
    fn fock_matches_closed_form_for_damped_thermal_cavity() {
        let grid = TimeGrid::new(0.2, 10_000).unwrap();
        let n0 = 1.0_f64.sinh().powi(2);
        let r = run(&cavity(n0), &crow(0.4), grid, None);
        let rho0 = FockDensityMatrix::thermal(n0, 30);
        let f = fock_evolve(&r.coeffs, &rho0, FockOptions::default()).unwrap();
        let c = compare_fock(&f, &r.traj);
        assert!(c.max() < 1e-3, "{c:?}");
        assert!(f.trace.iter().all(|t| (t - 1.0).abs() < 1e-9));
    }

    #[test]
    fn fock_tracks_a_displaced_squeezed_cavity() {
        let grid = TimeGrid::new(0.2, 4000).unwrap();
        let cav = CavityInit {
            mean: Complex64::new(0.5, 0.2),
            n0: 0.8,
            s0: Complex64::new(0.3, 0.1),
        };
        let spec = InitialStateSpec::UncorrelatedThermal { occupation: Occupation::Zero, cavity: cav };
        let r = run(&spec, &crow(0.4), grid, None);
        let rho0 = FockDensityMatrix::gaussian(cav.mean, cav.n0, cav.s0, 40);
        let f = fock_evolve(&r.coeffs, &rho0, FockOptions::default()).unwrap();
        let c = compare_fock(&f, &r.traj);
        assert!(c.max() < 1e-3, "{c:?}");
    }

    #[test]
    fn singular_node_stops_fock_run() {
        let grid = TimeGrid::new(0.2, 40).unwrap();
        let mut r = run(&cavity(1.0), &crow(1.0), grid, None);
        r.coeffs.valid_flags[11] = false;
        let e = fock_evolve(&r.coeffs, &FockDensityMatrix::fock(0, 5), FockOptions::default());
        assert!(matches!(e, Err(Error::SingularNode { node: 11 })));
    }

    #[test]
    fn truncation_breach_is_reported() {
        let rho = FockDensityMatrix::thermal(6.0, 10);
        let grid = TimeGrid::new(0.2, 40).unwrap();
        let r = run(&cavity(1.0), &crow(1.0), grid, None);
        let e = fock_evolve(&r.coeffs, &rho, FockOptions::default());
        assert!(matches!(e, Err(Error::TruncationBreach { .. })));
    }
}
