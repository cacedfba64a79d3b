//! Reservoir models and the memory kernels derived from them.
//!
//! All kernels are sampled on a [`TimeGrid`]:
//!
//! * `g(τ) = ∫ dω/2π J(ω) e^{-iωτ}`, the memory kernel,
//! * `g̃(τ) = ∫ dω/2π J(ω) n̄(ω) e^{-iωτ}`, the thermal kernel,
//! * `h(τ) = Σ_k g_k sin k e^{-iω_k τ}`, the waveguide kernel entering `F(t)`.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quadrature;

/// Relative tolerance of all band quadratures.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ReservoirModel {
    /// Coupled-resonator waveguide: `ω_k = ω₀ - 2λ₀ cos k`, `g_k = √(2/π) λ sin k`.
    Crow {
        omega0: f64,
        lambda0: f64,
        lambda: f64,
    },
    /// Explicit list of `(ω_k, V_k)`.
    DiscreteModes { modes: Vec<(f64, Complex64)> },
    /// `J(ω)` sampled uniformly on `band`, linearly interpolated, zero outside.
    Tabulated { band: (f64, f64), samples: Vec<f64> },
}

impl ReservoirModel {
    /// Waveguide with coupling given as `η = λ/λ₀`.
    pub fn crow(omega0: f64, lambda0: f64, eta: f64) -> Result<Self> {
        let m = ReservoirModel::Crow {
            omega0,
            lambda0,
            lambda: eta * lambda0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReservoirModel::Crow {
                omega0,
                lambda0,
                lambda,
            } => {
                if !omega0.is_finite() || !(lambda0.is_finite() && *lambda0 > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "need finite omega0 and lambda0 > 0, got omega0 = {omega0}, lambda0 = {lambda0}"
                    )));
                }
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(Error::InvalidModel(format!("need lambda >= 0, got {lambda}")));
                }
            }
            ReservoirModel::DiscreteModes { modes } => {
                if modes.is_empty() {
                    return Err(Error::InvalidModel("mode list is empty".into()));
                }
                if modes
                    .iter()
                    .any(|(w, v)| !w.is_finite() || !v.re.is_finite() || !v.im.is_finite())
                {
                    return Err(Error::InvalidModel("non-finite mode frequency or coupling".into()));
                }
            }
            ReservoirModel::Tabulated { band, samples } => {
                if !(band.0.is_finite() && band.1.is_finite() && band.1 > band.0) {
                    return Err(Error::InvalidModel(format!("bad band {band:?}")));
                }
                if samples.len() < 2 {
                    return Err(Error::InvalidModel("need at least two samples".into()));
                }
                if samples.iter().any(|j| !(j.is_finite() && *j >= 0.0)) {
                    return Err(Error::InvalidModel("J must be finite and non-negative".into()));
                }
            }
        }
        Ok(())
    }

    /// Spectral density `J(ω)`. Discrete models have no density and return 0.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        match self {
            ReservoirModel::Crow { .. } => crow_spectral_density(self, omega),
            ReservoirModel::Tabulated { band, samples } => {
                if omega < band.0 || omega > band.1 {
                    return 0.0;
                }
                let n = samples.len() - 1;
                let x = (omega - band.0) / (band.1 - band.0) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let f = x - i as f64;
                samples[i] * (1.0 - f) + samples[i + 1] * f
            }
            ReservoirModel::DiscreteModes { .. } => 0.0,
        }
    }

    /// `∫ dω/2π J(ω) n̄(ω) e^{-iωτ}` by adaptive quadrature.
    fn band_integral(&self, tau: f64, occ: &Occupation) -> Result<Complex64> {
        match self {
            ReservoirModel::Crow {
                omega0,
                lambda0,
                lambda,
            } => {
                // ω = ω₀ - 2λ₀ cos k removes the square-root band edges:
                // dω/2π J(ω) = (2λ²/π) sin²k dk.
                let c = 2.0 * lambda * lambda / PI;
                let panels = 16 + (4.0 * lambda0 * tau.abs()).ceil() as usize;
                let breaks = quadrature::uniform_breaks(0.0, PI, panels);
                let bad = Cell::new(None);
                let v = quadrature::integrate(
                    |k| {
                        let w = omega0 - 2.0 * lambda0 * k.cos();
                        let nb = occ.eval(w);
                        if nb < 0.0 {
                            if bad.get().is_none() {
                                bad.set(Some((w, nb)));
                            }
                        }
                        let s = k.sin();
                        Complex64::from_polar(c * s * s * nb, -w * tau)
                    },
                    &breaks,
                    QUAD_TOL,
                )?;
                check_occupation(bad.get())?;
                Ok(v)
            }
            ReservoirModel::Tabulated { band, samples } => {
                let n = samples.len() - 1;
                let width = band.1 - band.0;
                let per_panel = (width * tau.abs() / n as f64 / 2.0).ceil().max(1.0) as usize;
                let breaks = quadrature::uniform_breaks(band.0, band.1, n * per_panel);
                let bad = Cell::new(None);
                let v = quadrature::integrate(
                    |w| {
                        let nb = occ.eval(w);
                        if nb < 0.0 {
                            if bad.get().is_none() {
                                bad.set(Some((w, nb)));
                            }
                        }
                        Complex64::from_polar(self.spectral_density(w) * nb / (2.0 * PI), -w * tau)
                    },
                    &breaks,
                    QUAD_TOL,
                )?;
                check_occupation(bad.get())?;
                Ok(v)
            }
            ReservoirModel::DiscreteModes { modes } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, v) in modes {
                    let nb = occ.eval(*w);
                    check_occupation((nb < 0.0).then_some((*w, nb)))?;
                    acc += Complex64::from_polar(v.norm_sqr() * nb, -w * tau);
                }
                Ok(acc)
            }
        }
    }
}

fn check_occupation(bad: Option<(f64, f64)>) -> Result<()> {
    match bad {
        Some((omega, value)) => Err(Error::NegativeOccupation { omega, value }),
        None => Ok(()),
    }
}

/// Initial photon distribution `n̄(ω)` of the reservoir.
#[derive(Clone)]
pub enum Occupation {
    Zero,
    Constant(f64),
    /// Bose–Einstein distribution at `temperature` (units of ω₀, k_B = ħ = 1).
    Thermal { temperature: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Occupation {
    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            Occupation::Zero => 0.0,
            Occupation::Constant(c) => *c,
            Occupation::Thermal { temperature } => {
                if *temperature <= 0.0 {
                    0.0
                } else {
                    1.0 / (omega / temperature).exp_m1()
                }
            }
            Occupation::Custom(f) => f(omega),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Occupation::Zero => true,
            Occupation::Constant(c) => *c == 0.0,
            Occupation::Thermal { temperature } => *temperature <= 0.0,
            Occupation::Custom(_) => false,
        }
    }
}

impl fmt::Debug for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Occupation::Zero => write!(f, "Zero"),
            Occupation::Constant(c) => write!(f, "Constant({c})"),
            Occupation::Thermal { temperature } => write!(f, "Thermal {{ temperature: {temperature} }}"),
            Occupation::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Complex samples of a kernel on `τ ∈ {0, dt, …, t_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

impl KernelSeries {
    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    fn from_fn<F>(grid: TimeGrid, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|j| f(grid.t(j))).collect();
        Self { grid, values }
    }

    fn try_from_fn<F>(grid: TimeGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|j| f(grid.t(j)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }
}

/// `J(ω) = (λ/λ₀)² √(4λ₀² − (ω−ω₀)²)` inside the band, 0 outside.
///
/// # Panics
/// If `model` is not [`ReservoirModel::Crow`].
pub fn crow_spectral_density(model: &ReservoirModel, omega: f64) -> f64 {
    let ReservoirModel::Crow {
        omega0,
        lambda0,
        lambda,
    } = model
    else {
        panic!("crow_spectral_density needs a Crow model");
    };
    let d = omega - omega0;
    let r2 = 4.0 * lambda0 * lambda0 - d * d;
    if r2 <= 0.0 {
        return 0.0;
    }
    (lambda / lambda0).powi(2) * r2.sqrt()
}

/// `J₁(x)/x`, with its limit 1/2 at the origin.
fn j1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        0.5 - x * x / 16.0
    } else {
        libm::j1(x) / x
    }
}

/// Memory kernel `g(τ)` on the grid.
pub fn memory_kernel(model: &ReservoirModel, grid: TimeGrid) -> Result<KernelSeries> {
    model.validate()?;
    match model {
        ReservoirModel::Crow {
            omega0,
            lambda0,
            lambda,
        } => Ok(KernelSeries::from_fn(grid, |tau| {
            // λ² e^{-iω₀τ} J₁(2λ₀τ)/(λ₀τ)
            let amp = 2.0 * lambda * lambda * j1_over_x(2.0 * lambda0 * tau);
            Complex64::from_polar(amp, -omega0 * tau)
        })),
        ReservoirModel::DiscreteModes { modes } => Ok(KernelSeries::from_fn(grid, |tau| {
            modes
                .iter()
                .map(|(w, v)| Complex64::from_polar(v.norm_sqr(), -w * tau))
                .sum()
        })),
        ReservoirModel::Tabulated { .. } => KernelSeries::try_from_fn(grid, |tau| {
            model.band_integral(tau, &Occupation::Constant(1.0))
        }),
    }
}

/// Thermal kernel `g̃(τ)` on the grid.
pub fn thermal_kernel(
    model: &ReservoirModel,
    occupation: &Occupation,
    grid: TimeGrid,
) -> Result<KernelSeries> {
    model.validate()?;
    match occupation {
        Occupation::Zero => return Ok(KernelSeries::zeros(grid)),
        Occupation::Constant(c) => {
            if *c < 0.0 {
                return Err(Error::NegativeOccupation {
                    omega: f64::NAN,
                    value: *c,
                });
            }
            let mut k = memory_kernel(model, grid)?;
            k.values.iter_mut().for_each(|v| *v *= *c);
            return Ok(k);
        }
        _ => {}
    }
    if occupation.is_zero() {
        return Ok(KernelSeries::zeros(grid));
    }
    KernelSeries::try_from_fn(grid, |tau| model.band_integral(tau, occupation))
}

/// Waveguide kernel `h(τ) = (λ/λ₀) √(π/2) e^{-iω₀τ} J₁(2λ₀τ)/τ`, with `h(0) = λ√(π/2)`.
pub fn f_kernel(model: &ReservoirModel, grid: TimeGrid) -> Result<KernelSeries> {
    model.validate()?;
    let ReservoirModel::Crow {
        omega0,
        lambda0,
        lambda,
    } = *model
    else {
        return Err(Error::InvalidModel("the F kernel is defined for the waveguide model only".into()));
    };
    let c = lambda * (PI / 2.0).sqrt();
    Ok(KernelSeries::from_fn(grid, |tau| {
        let amp = 2.0 * c * j1_over_x(2.0 * lambda0 * tau);
        Complex64::from_polar(amp, -omega0 * tau)
    }))
}

/// Band quadrature of `g(τ)` at a single time, bypassing the closed form.
pub fn memory_kernel_quadrature(model: &ReservoirModel, tau: f64) -> Result<Complex64> {
    model.validate()?;
    model.band_integral(tau, &Occupation::Constant(1.0))
}

/// Band quadrature of `h(τ) = ∫₀^π dk g_k sin k e^{-iω_kτ}` at a single time.
pub fn f_kernel_quadrature(model: &ReservoirModel, tau: f64) -> Result<Complex64> {
    model.validate()?;
    let ReservoirModel::Crow {
        omega0,
        lambda0,
        lambda,
    } = *model
    else {
        return Err(Error::InvalidModel("the F kernel is defined for the waveguide model only".into()));
    };
    let c = (2.0 / PI).sqrt() * lambda;
    let panels = 16 + (4.0 * lambda0 * tau.abs()).ceil() as usize;
    quadrature::integrate(
        |k| {
            let s = k.sin();
            Complex64::from_polar(c * s * s, -(omega0 - 2.0 * lambda0 * k.cos()) * tau)
        },
        &quadrature::uniform_breaks(0.0, PI, panels),
        QUAD_TOL,
    )
}
