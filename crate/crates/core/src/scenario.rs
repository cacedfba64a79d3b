//! Scenario configuration, figure presets and the end-to-end pipeline:
//! reservoir → propagator → correlations → observables → coefficients,
//! checked against the chain oracle and the Fock-space integrator.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::correlations::{
    correlation_functions, initial_chain_moments, CavityInit, CorrelationFunctions, InitialStateSpec,
};
use crate::error::{Error, Result};
use crate::export;
use crate::grid::TimeGrid;
use crate::observables::{evolve_observables, ObservableTrajectory};
use crate::oracle::{oracle_moments, oracle_u, CavityMoments, ChainHamiltonian, ChainPropagator, WINDOW_FRACTION};
use crate::propagator::{compute_f, solve_u, ConvolutionSeries, PropagatorSolution};
use crate::reservoir::{f_kernel, memory_kernel, thermal_kernel, KernelSeries, Occupation, ReservoirModel};
use crate::tcl::{
    compare_fock, extract_coefficients, fock_evolve, moment_ode_residuals, FockComparison, FockDensityMatrix,
    FockOptions, FockTrajectory, MasterEqCoefficients, MomentResiduals,
};

/// Default step of the figure presets (units of 1/ω₀).
pub const DEFAULT_DT: f64 = 0.1;

/// Tolerance shared by every validation in the report.
pub const VALIDATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Custom,
}

impl Preset {
    pub const FIGURES: [Preset; 6] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Custom => "custom",
        }
    }

    fn eta(self) -> f64 {
        match self {
            Preset::Fig2a | Preset::Fig3a => 0.4,
            Preset::Fig2b | Preset::Fig3b => 1.2,
            Preset::Fig2c | Preset::Fig3c => 2.0,
            Preset::Custom => 1.0,
        }
    }

    fn kind(self) -> StateKind {
        match self {
            Preset::Fig2a | Preset::Fig2b | Preset::Fig2c => StateKind::Squeezed,
            Preset::Fig3a | Preset::Fig3b | Preset::Fig3c => StateKind::BeamSplitter,
            Preset::Custom => StateKind::Thermal,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Preset::FIGURES
            .iter()
            .chain(std::iter::once(&Preset::Custom))
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig2a..fig2c, fig3a..fig3c or custom)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Squeezed,
    BeamSplitter,
    Thermal,
}

impl FromStr for StateKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "squeezed" | "squeezed_vacuum" => Ok(StateKind::Squeezed),
            "beam_splitter" | "beamsplitter" => Ok(StateKind::BeamSplitter),
            "thermal" | "uncorrelated_thermal" => Ok(StateKind::Thermal),
            _ => Err(format!("unknown state `{s}` (expected squeezed, beam_splitter or thermal)")),
        }
    }
}

/// Explicitly set configuration values. Unset fields fall back to the preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub omega_c: Option<f64>,
    pub omega0: Option<f64>,
    pub lambda0: Option<f64>,
    pub eta: Option<f64>,
    pub state: Option<StateKind>,
    pub r_s: Option<f64>,
    pub theta_s: Option<f64>,
    pub vartheta: Option<f64>,
    pub nbar_a: Option<f64>,
    pub nbar_b1: Option<f64>,
    pub occupation: Option<f64>,
    pub temperature: Option<f64>,
    pub n0: Option<f64>,
    pub mean_re: Option<f64>,
    pub mean_im: Option<f64>,
    pub s0_re: Option<f64>,
    pub s0_im: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub run_oracle: Option<bool>,
    pub run_fock: Option<bool>,
    pub oracle_n: Option<usize>,
    pub fock_nmax: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("field `{key}`: cannot parse `{value}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("field `{key}`: expected true or false, got `{value}`"),
        }),
    }
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("field `{key}`: missing value"),
                });
            }
            let f = |v: &str| parse_value::<f64>(line, key, v);
            match key {
                "preset" => {
                    o.preset = Some(value.parse().map_err(|m| Error::Config { line, message: m })?)
                }
                "state" => o.state = Some(value.parse().map_err(|m| Error::Config { line, message: m })?),
                "omega_c" => o.omega_c = Some(f(value)?),
                "omega0" => o.omega0 = Some(f(value)?),
                "lambda0" => o.lambda0 = Some(f(value)?),
                "eta" => o.eta = Some(f(value)?),
                "r_s" => o.r_s = Some(f(value)?),
                "theta_s" => o.theta_s = Some(f(value)?),
                "vartheta" => o.vartheta = Some(f(value)?),
                "nbar_a" => o.nbar_a = Some(f(value)?),
                "nbar_b1" => o.nbar_b1 = Some(f(value)?),
                "occupation" => o.occupation = Some(f(value)?),
                "temperature" => o.temperature = Some(f(value)?),
                "n0" => o.n0 = Some(f(value)?),
                "mean_re" => o.mean_re = Some(f(value)?),
                "mean_im" => o.mean_im = Some(f(value)?),
                "s0_re" => o.s0_re = Some(f(value)?),
                "s0_im" => o.s0_im = Some(f(value)?),
                "dt" => o.dt = Some(f(value)?),
                "t_max" | "tmax" => o.t_max = Some(f(value)?),
                "run_oracle" => o.run_oracle = Some(parse_bool(line, key, value)?),
                "run_fock" => o.run_fock = Some(parse_bool(line, key, value)?),
                "oracle_n" => o.oracle_n = Some(parse_value(line, key, value)?),
                "fock_nmax" => o.fock_nmax = Some(parse_value(line, key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown field `{key}`"),
                    })
                }
            }
        }
        Ok(o)
    }

    /// Values set in `other` win.
    pub fn merge(self, other: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            preset, omega_c, omega0, lambda0, eta, state, r_s, theta_s, vartheta, nbar_a, nbar_b1, occupation,
            temperature, n0, mean_re, mean_im, s0_re, s0_im, dt, t_max, run_oracle, run_fock, oracle_n, fock_nmax,
            out
        )
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub omega_c: f64,
    pub omega0: f64,
    pub lambda0: f64,
    pub eta: f64,
    pub state: InitialStateSpec,
    pub dt: f64,
    pub t_max: f64,
    pub run_oracle: bool,
    pub run_fock: bool,
    pub oracle_n: usize,
    pub fock_nmax: usize,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn preset(preset: Preset) -> Self {
        Self::from_overrides(&Overrides {
            preset: Some(preset),
            ..Overrides::default()
        })
        .expect("presets are valid")
    }

    pub fn from_overrides(o: &Overrides) -> Result<Self> {
        let preset = o.preset.unwrap_or(Preset::Custom);
        let kind = o.state.unwrap_or(preset.kind());
        let state = match kind {
            StateKind::Squeezed => InitialStateSpec::SqueezedVacuumCorrelated {
                r_s: o.r_s.unwrap_or(1.0),
                theta_s: o.theta_s.unwrap_or(0.0),
            },
            StateKind::BeamSplitter => InitialStateSpec::BeamSplitterThermal {
                vartheta: o.vartheta.unwrap_or(PI / 2.0),
                nbar_a: o.nbar_a.unwrap_or(6.0),
                nbar_b1: o.nbar_b1.unwrap_or(0.0),
            },
            StateKind::Thermal => {
                if o.occupation.is_some() && o.temperature.is_some() {
                    return Err(Error::InvalidConfig(
                        "set either `occupation` or `temperature`, not both".into(),
                    ));
                }
                let occupation = match (o.occupation, o.temperature) {
                    (Some(c), _) => Occupation::Constant(c),
                    (_, Some(t)) => Occupation::Thermal { temperature: t },
                    _ => Occupation::Zero,
                };
                InitialStateSpec::UncorrelatedThermal {
                    occupation,
                    cavity: CavityInit {
                        mean: Complex64::new(o.mean_re.unwrap_or(0.0), o.mean_im.unwrap_or(0.0)),
                        n0: o.n0.unwrap_or(1.0),
                        s0: Complex64::new(o.s0_re.unwrap_or(0.0), o.s0_im.unwrap_or(0.0)),
                    },
                }
            }
        };
        let lambda0 = o.lambda0.unwrap_or(0.025);
        let t_max = o.t_max.unwrap_or(50.0 / lambda0);
        let oracle_n = o.oracle_n.unwrap_or_else(|| {
            // Default chain, enlarged if a longer run would leave the window.
            let needed = (2.0 * lambda0 * t_max / WINDOW_FRACTION).floor() as usize + 1;
            400.max((needed as f64 * 1.2).ceil() as usize)
        });
        let fock_nmax = o.fock_nmax.unwrap_or(match kind {
            StateKind::Squeezed => 30,
            StateKind::BeamSplitter | StateKind::Thermal => 60,
        });
        let cfg = Self {
            preset,
            omega_c: o.omega_c.unwrap_or(1.0),
            omega0: o.omega0.unwrap_or(1.0),
            lambda0,
            eta: o.eta.unwrap_or(preset.eta()),
            state,
            dt: o.dt.unwrap_or(DEFAULT_DT),
            t_max,
            run_oracle: o.run_oracle.unwrap_or(true),
            run_fock: o.run_fock.unwrap_or(true),
            oracle_n,
            fock_nmax,
            out: o.out.clone().unwrap_or_else(|| PathBuf::from(format!("out/{}", preset.name()))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max >= 2.0 * self.dt) {
            return bad(format!("t_max must cover at least two steps, got {}", self.t_max));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!("eta must be >= 0, got {}", self.eta));
        }
        if self.oracle_n == 0 || self.fock_nmax < 2 {
            return bad("oracle_n must be >= 1 and fock_nmax >= 2".into());
        }
        self.model().validate()?;
        self.state.validate()
    }

    pub fn model(&self) -> ReservoirModel {
        ReservoirModel::Crow {
            omega0: self.omega0,
            lambda0: self.lambda0,
            lambda: self.eta * self.lambda0,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_t_max(self.dt, self.t_max)
    }

    pub fn chain(&self) -> ChainHamiltonian {
        ChainHamiltonian {
            omega_c: self.omega_c,
            omega0: self.omega0,
            lambda0: self.lambda0,
            lambda: self.eta * self.lambda0,
            sites: self.oracle_n,
        }
    }

    fn occupation(&self) -> Occupation {
        match &self.state {
            InitialStateSpec::UncorrelatedThermal { occupation, .. } => occupation.clone(),
            _ => Occupation::Zero,
        }
    }
}

/// Whether the initial state carries system–reservoir cross-correlations.
pub fn is_correlated(spec: &InitialStateSpec) -> bool {
    !matches!(spec, InitialStateSpec::UncorrelatedThermal { .. })
}

/// Drops the cross-correlation terms `ν₁`, `ν₂` while keeping the reservoir
/// noise `υ₀`, `υ₁`, `υ₂`: same reduced cavity state and reservoir state, no
/// initial correlation between them.
pub fn without_cross_correlations(corr: &CorrelationFunctions) -> CorrelationFunctions {
    let zero = vec![Complex64::new(0.0, 0.0); corr.grid.len()];
    CorrelationFunctions {
        nu1: zero.clone(),
        nu2: zero.clone(),
        nu1_dot: zero.clone(),
        nu2_dot: zero,
        ..corr.clone()
    }
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub u: Vec<Complex64>,
    pub moments: CavityMoments,
    pub u_error: f64,
    pub mean_error: f64,
    pub n_error: f64,
    pub s_error: f64,
}

#[derive(Debug, Clone)]
pub enum FockCheck {
    Completed {
        trajectory: FockTrajectory,
        comparison: FockComparison,
    },
    Failed(String),
}

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub grid: TimeGrid,
    pub kernel: KernelSeries,
    pub sol: PropagatorSolution,
    pub conv: ConvolutionSeries,
    pub corr: CorrelationFunctions,
    pub traj: ObservableTrajectory,
    pub coeffs: MasterEqCoefficients,
    pub residuals: MomentResiduals,
    pub uncorrelated: Option<ObservableTrajectory>,
    pub oracle: Option<OracleCheck>,
    pub fock: Option<FockCheck>,
}

fn max_dist<T: Copy>(a: &[T], b: &[T], d: impl Fn(T, T) -> f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| d(*x, *y)).fold(0.0, f64::max)
}

pub fn run_oracle(config: &ScenarioConfig, sol: &PropagatorSolution, traj: &ObservableTrajectory) -> Result<OracleCheck> {
    let grid = sol.grid;
    let chain = config.chain();
    let prop = ChainPropagator::new(chain)?;
    let u = oracle_u(&prop, grid)?;
    let init = initial_chain_moments(&config.state, &chain)?;
    let moments = oracle_moments(&prop, &init, grid)?;
    Ok(OracleCheck {
        u_error: max_dist(&u, &sol.u, |a, b| (a - b).norm()),
        mean_error: max_dist(&moments.mean, &traj.mean, |a, b| (a - b).norm()),
        n_error: max_dist(&moments.n, &traj.n, |a, b| (a - b).abs()),
        s_error: max_dist(&moments.s, &traj.s, |a, b| (a - b).norm()),
        u,
        moments,
    })
}

pub fn initial_density_matrix(cavity: CavityInit, n_max: usize) -> FockDensityMatrix {
    if cavity.mean == Complex64::new(0.0, 0.0) && cavity.s0 == Complex64::new(0.0, 0.0) {
        FockDensityMatrix::thermal(cavity.n0, n_max)
    } else {
        FockDensityMatrix::gaussian(cavity.mean, cavity.n0, cavity.s0, n_max)
    }
}

pub fn run_fock(config: &ScenarioConfig, coeffs: &MasterEqCoefficients, traj: &ObservableTrajectory) -> FockCheck {
    let rho0 = initial_density_matrix(config.state.cavity(), config.fock_nmax);
    match fock_evolve(coeffs, &rho0, FockOptions::default()) {
        Ok(trajectory) => FockCheck::Completed {
            comparison: compare_fock(&trajectory, traj),
            trajectory,
        },
        Err(e) => FockCheck::Failed(e.to_string()),
    }
}

/// Runs the full pipeline without touching the file system.
pub fn run_pipeline(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let grid = config.grid()?;
    let model = config.model();
    let kernel = memory_kernel(&model, grid)?;
    let sol = solve_u(&kernel, config.omega_c, grid)?;
    let conv = compute_f(&f_kernel(&model, grid)?, &sol)?;
    let occupation = config.occupation();
    let gtilde = thermal_kernel(&model, &occupation, grid)?;
    let corr = correlation_functions(&config.state, &sol, &conv, &gtilde)?;
    let traj = evolve_observables(&sol, &corr, &config.state)?;
    let coeffs = extract_coefficients(&sol, &corr)?;
    let residuals = moment_ode_residuals(&coeffs, &traj);

    let uncorrelated = if is_correlated(&config.state) {
        Some(evolve_observables(&sol, &without_cross_correlations(&corr), &config.state)?)
    } else {
        None
    };
    let oracle = if config.run_oracle {
        Some(run_oracle(config, &sol, &traj)?)
    } else {
        None
    };
    let fock = config.run_fock.then(|| run_fock(config, &coeffs, &traj));
    Ok(ScenarioRun {
        config: config.clone(),
        grid,
        kernel,
        sol,
        conv,
        corr,
        traj,
        coeffs,
        residuals,
        uncorrelated,
        oracle,
        fock,
    })
}

/// One line of the validation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn bound(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub dt: f64,
    pub n_steps: usize,
    pub t_max_lambda0: f64,
    pub singular_nodes: usize,
    pub unphysical_nodes: usize,
    pub clamped_nodes: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(
            s,
            "grid: dt = {}, steps = {}, t_max*lambda0 = {:.3}",
            export::fmt_e12(self.dt),
            self.n_steps,
            self.t_max_lambda0
        );
        let _ = writeln!(s, "singular nodes (|u| < 1e-8): {}", self.singular_nodes);
        let _ = writeln!(s, "unphysical nodes: {}", self.unphysical_nodes);
        let _ = writeln!(s, "clamped squeezing nodes: {}", self.clamped_nodes);
        for c in &self.checks {
            let _ = write!(
                s,
                "{:<28} {:>12} (tol {:.1e})  {}",
                c.name,
                if c.value.is_nan() { "n/a".to_string() } else { format!("{:.3e}", c.value) },
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            );
            if let Some(n) = &c.note {
                let _ = write!(s, "  [{n}]");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "status: {}", if self.passed() { "ok" } else { "validation failure" });
        s
    }
}

impl ScenarioRun {
    pub fn report(&self) -> Report {
        let mut checks = Vec::new();
        if let Some(o) = &self.oracle {
            checks.push(Check::bound("oracle u max error", o.u_error, VALIDATION_TOL));
            checks.push(Check::bound("oracle mean max error", o.mean_error, VALIDATION_TOL));
            checks.push(Check::bound("oracle n max error", o.n_error, VALIDATION_TOL));
            checks.push(Check::bound("oracle s max error", o.s_error, VALIDATION_TOL));
        }
        let r = &self.residuals;
        checks.push(Check::bound("ode residual <a> (rel)", r.max_relative_mean, VALIDATION_TOL));
        checks.push(Check::bound("ode residual n (rel)", r.max_relative_n, VALIDATION_TOL));
        checks.push(Check::bound("ode residual s (rel)", r.max_relative_s, VALIDATION_TOL));
        match &self.fock {
            Some(FockCheck::Completed { comparison, trajectory }) => {
                let mut c = Check::bound("fock max moment error", comparison.max(), VALIDATION_TOL);
                c.note = Some(format!(
                    "N_max = {}, trace renormalisations = {}",
                    self.config.fock_nmax, trajectory.renormalizations
                ));
                checks.push(c);
            }
            Some(FockCheck::Failed(msg)) => checks.push(Check {
                name: "fock max moment error".into(),
                value: f64::NAN,
                tolerance: VALIDATION_TOL,
                passed: false,
                note: Some(msg.clone()),
            }),
            None => {}
        }
        let unphysical = self
            .traj
            .physical_flags
            .iter()
            .zip(&self.sol.zero_flags)
            .filter(|(p, z)| !**p && !**z)
            .count();
        checks.push(Check::bound("unphysical nodes", unphysical as f64, 0.0));
        Report {
            scenario: self.config.preset.name().to_string(),
            dt: self.grid.dt(),
            n_steps: self.grid.n_steps(),
            t_max_lambda0: self.grid.t_max() * self.config.lambda0,
            singular_nodes: self.sol.zero_flags.iter().filter(|f| **f).count(),
            unphysical_nodes: unphysical,
            clamped_nodes: self.traj.clamped.len(),
            checks,
        }
    }

    /// Writes all CSV tables, the plot script and the report into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Report> {
        fs::create_dir_all(dir)?;
        export::write_kernel(&dir.join("kernel.csv"), &self.kernel)?;
        export::write_propagator(&dir.join("u.csv"), &self.sol)?;
        export::write_correlations(&dir.join("correlations.csv"), &self.corr)?;
        export::write_observables(&dir.join("observables.csv"), &self.traj)?;
        export::write_coefficients(&dir.join("coefficients.csv"), &self.coeffs)?;
        if let Some(o) = &self.oracle {
            export::write_oracle(&dir.join("oracle.csv"), &o.moments)?;
        }
        if let Some(unc) = &self.uncorrelated {
            export::write_comparison(&dir.join("compare.csv"), self.grid, &self.traj, unc)?;
        }
        fs::write(dir.join("plot.gp"), self.plot_script())?;
        let report = self.report();
        fs::write(dir.join("report.txt"), report.render())?;
        Ok(report)
    }

    fn plot_script(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}: n(t) and r(t) against t*lambda0", self.config.preset);
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set terminal pngcairo size 900,700");
        let _ = writeln!(s, "set output 'plot.png'");
        let _ = writeln!(s, "lambda0 = {}", self.config.lambda0);
        let _ = writeln!(s, "set xlabel 't {{/Symbol l}}_0'");
        let _ = writeln!(s, "set multiplot layout 2,1");
        let _ = writeln!(s, "set ylabel 'n(t)'");
        let mut n_plot = "plot 'observables.csv' every ::1 using ($1*lambda0):4 with lines title 'n(t)'".to_string();
        if self.uncorrelated.is_some() {
            n_plot.push_str(", 'compare.csv' every ::1 using ($1*lambda0):3 with lines dt 2 title 'uncorrelated'");
        }
        let _ = writeln!(s, "{n_plot}");
        let _ = writeln!(s, "set ylabel 'r(t)'");
        let _ = writeln!(s, "plot 'observables.csv' every ::1 using ($1*lambda0):7 with lines title 'r(t)'");
        let _ = writeln!(s, "unset multiplot");
        s
    }
}

/// Runs a scenario and writes its artifacts into `config.out`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(ScenarioRun, Report)> {
    let run = run_pipeline(config)?;
    let report = run.write_artifacts(&config.out)?;
    Ok((run, report))
}

/// Paired trajectories with and without initial system–reservoir correlations.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub grid: TimeGrid,
    pub correlated: ObservableTrajectory,
    pub uncorrelated: ObservableTrajectory,
    pub difference: Vec<f64>,
}

pub fn compare_with_uncorrelated(config: &ScenarioConfig) -> Result<Comparison> {
    if !is_correlated(&config.state) {
        return Err(Error::InvalidState(
            "comparison needs a correlated initial state (squeezed or beam splitter)".into(),
        ));
    }
    let mut light = config.clone();
    light.run_oracle = false;
    light.run_fock = false;
    let run = run_pipeline(&light)?;
    let uncorrelated = run.uncorrelated.expect("partner exists for correlated states");
    let difference = run.traj.n.iter().zip(&uncorrelated.n).map(|(a, b)| a - b).collect();
    Ok(Comparison {
        grid: run.grid,
        correlated: run.traj,
        uncorrelated,
        difference,
    })
}
