//! Browser bindings: three small interactive runs of the cavity simulator.
//! Build with `wasm-pack build --target web` and serve `www/`.

use nmcavity::scenario::{run_pipeline, Overrides, Preset, ScenarioConfig, StateKind};
use nmcavity::TimeGrid;
use wasm_bindgen::prelude::*;

const LAMBDA0: f64 = 0.025;
const MAX_POINTS: usize = 800;

/// A sampled curve pair on a common `t·λ₀` axis.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    t: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

#[wasm_bindgen]
impl Series {
    /// Time axis in units of 1/λ₀.
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn first(&self) -> Vec<f64> {
        self.first.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn second(&self) -> Vec<f64> {
        self.second.clone()
    }
}

fn run(o: Overrides) -> Result<nmcavity::scenario::ScenarioRun, String> {
    let config = ScenarioConfig::from_overrides(&Overrides {
        run_oracle: Some(false),
        run_fock: Some(false),
        ..o
    })
    .map_err(|e| e.to_string())?;
    run_pipeline(&config).map_err(|e| e.to_string())
}

fn thin(grid: TimeGrid, a: &[f64], b: &[f64]) -> Series {
    let stride = grid.len().div_ceil(MAX_POINTS).max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    Series {
        t: (0..grid.len()).step_by(stride).map(|j| grid.t(j) * LAMBDA0).collect(),
        first: pick(a),
        second: pick(b),
    }
}

fn grid(t_max_lambda0: f64, dt: f64) -> (Option<f64>, Option<f64>) {
    (Some(t_max_lambda0 / LAMBDA0), Some(dt))
}

/// `|u(t)|²` for coupling ratio `eta`; `second` is empty.
pub fn propagator_curve(eta: f64, t_max_lambda0: f64, dt: f64) -> Result<Series, String> {
    let (t_max, dt) = grid(t_max_lambda0, dt);
    let r = run(Overrides {
        state: Some(StateKind::Thermal),
        eta: Some(eta),
        t_max,
        dt,
        ..Overrides::default()
    })?;
    let u2: Vec<f64> = r.sol.u.iter().map(|u| u.norm_sqr()).collect();
    let mut s = thin(r.grid, &u2, &[]);
    s.second.clear();
    Ok(s)
}

/// Cavity intensity `n(t)` and squeezing `r(t)` for an initially squeezed
/// cavity–waveguide pair.
pub fn squeezing_curves(eta: f64, r_s: f64, theta_s: f64, t_max_lambda0: f64, dt: f64) -> Result<Series, String> {
    let (t_max, dt) = grid(t_max_lambda0, dt);
    let r = run(Overrides {
        preset: Some(Preset::Fig2a),
        eta: Some(eta),
        r_s: Some(r_s),
        theta_s: Some(theta_s),
        t_max,
        dt,
        ..Overrides::default()
    })?;
    Ok(thin(r.grid, &r.traj.n, &r.traj.r))
}

/// `n(t)` with and without the beam-splitter correlation, at cavity detuning
/// `omega_c − ω₀`.
pub fn correlation_curves(
    eta: f64,
    nbar_a: f64,
    vartheta: f64,
    detuning: f64,
    t_max_lambda0: f64,
    dt: f64,
) -> Result<Series, String> {
    let (t_max, dt) = grid(t_max_lambda0, dt);
    let r = run(Overrides {
        preset: Some(Preset::Fig3a),
        eta: Some(eta),
        nbar_a: Some(nbar_a),
        vartheta: Some(vartheta),
        omega_c: Some(1.0 + detuning),
        t_max,
        dt,
        ..Overrides::default()
    })?;
    let unc = r.uncorrelated.as_ref().ok_or("state carries no correlation")?;
    Ok(thin(r.grid, &r.traj.n, &unc.n))
}

#[wasm_bindgen]
pub fn propagator(eta: f64, t_max_lambda0: f64, dt: f64) -> Result<Series, JsError> {
    propagator_curve(eta, t_max_lambda0, dt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn squeezing(eta: f64, r_s: f64, theta_s: f64, t_max_lambda0: f64, dt: f64) -> Result<Series, JsError> {
    squeezing_curves(eta, r_s, theta_s, t_max_lambda0, dt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn correlation(
    eta: f64,
    nbar_a: f64,
    vartheta: f64,
    detuning: f64,
    t_max_lambda0: f64,
    dt: f64,
) -> Result<Series, JsError> {
    correlation_curves(eta, nbar_a, vartheta, detuning, t_max_lambda0, dt).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_starts_at_one_and_is_thinned() {
        let s = propagator_curve(0.4, 20.0, 0.2).unwrap();
        assert_eq!(s.first[0], 1.0);
        assert!(s.t.len() <= MAX_POINTS + 1);
        assert_eq!(s.t.len(), s.first.len());
        assert!(s.second.is_empty());
        assert!((s.t.last().unwrap() - 20.0).abs() < 0.1);
    }

    #[test]
    fn squeezing_starts_from_the_reduced_state() {
        let s = squeezing_curves(2.0, 1.0, 0.0, 10.0, 0.2).unwrap();
        assert!((s.first[0] - 1f64.sinh().powi(2)).abs() < 1e-12);
        assert_eq!(s.second[0], 0.0);
        assert!(s.second.iter().any(|r| *r > 0.05));
    }

    #[test]
    fn correlation_shows_only_off_resonance() {
        let on = correlation_curves(2.0, 6.0, std::f64::consts::FRAC_PI_2, 0.0, 10.0, 0.2).unwrap();
        let off = correlation_curves(2.0, 6.0, std::f64::consts::FRAC_PI_2, 0.01, 10.0, 0.2).unwrap();
        let gap = |s: &Series| s.first.iter().zip(&s.second).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap(&on) < 1e-12);
        assert!(gap(&off) > 1e-2);
    }

    #[test]
    fn bad_input_is_an_error_message() {
        assert!(propagator_curve(-1.0, 10.0, 0.2).is_err());
        assert!(squeezing_curves(1.0, 1.0, 0.0, 10.0, 0.0).is_err());
    }
}
