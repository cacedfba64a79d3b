//! Brute-force reference: the cavity plus a finite open chain of resonators,
//! evolved exactly at the one-particle level.
//!
//! For `c = (a, b₁, …, b_N)` the Heisenberg solution is `c(t) = W(t) c(0)` with
//! `W = e^{-iHt}`. Second moments follow as `M(t) = W* M Wᵀ` for
//! `M_ij = ⟨c_i† c_j⟩` and `S(t) = W S Wᵀ` for `S_ij = ⟨c_i c_j⟩`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fraction of the edge-reflection time usable before the finite chain
/// stops mimicking the semi-infinite one.
pub const WINDOW_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainHamiltonian {
    pub omega_c: f64,
    pub omega0: f64,
    pub lambda0: f64,
    pub lambda: f64,
    /// Number of chain sites `N`; the matrix is `(N+1) × (N+1)`.
    pub sites: usize,
}

impl ChainHamiltonian {
    pub fn size(&self) -> usize {
        self.sites + 1
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut h = DMatrix::zeros(n, n);
        h[(0, 0)] = self.omega_c;
        for i in 1..n {
            h[(i, i)] = self.omega0;
        }
        if n > 1 {
            h[(0, 1)] = self.lambda;
            h[(1, 0)] = self.lambda;
        }
        for i in 1..n.saturating_sub(1) {
            h[(i, i + 1)] = -self.lambda0;
            h[(i + 1, i)] = -self.lambda0;
        }
        h
    }

    /// Longest time for which the chain reproduces the semi-infinite reservoir.
    pub fn window(&self) -> f64 {
        if self.lambda0 == 0.0 {
            f64::INFINITY
        } else {
            WINDOW_FRACTION * self.sites as f64 / (2.0 * self.lambda0)
        }
    }

    fn check_window(&self, t_max: f64) -> Result<()> {
        if t_max < self.window() {
            return Ok(());
        }
        let min_sites = (2.0 * self.lambda0 * t_max / WINDOW_FRACTION).floor() as usize + 1;
        Err(Error::ValidityWindow {
            sites: self.sites,
            t_max,
            min_sites,
        })
    }
}

/// Eigendecomposition of a chain Hamiltonian, reused for every time.
#[derive(Debug, Clone)]
pub struct ChainPropagator {
    pub hamiltonian: ChainHamiltonian,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl ChainPropagator {
    pub fn new(hamiltonian: ChainHamiltonian) -> Result<Self> {
        let h = hamiltonian.matrix();
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigen("Hamiltonian has non-finite entries".into()));
        }
        let eig = SymmetricEigen::try_new(h, 1e-14, 0)
            .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
        Ok(Self {
            hamiltonian,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// Full `W(t) = V e^{-iEt} Vᵀ`.
    pub fn evolution(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.hamiltonian.size();
        let v = self.vectors.map(|x| Complex64::new(x, 0.0));
        let mut vd = v.clone();
        for (m, e) in self.energies.iter().enumerate() {
            let p = Complex64::from_polar(1.0, -e * t);
            vd.column_mut(m).iter_mut().for_each(|x| *x *= p);
        }
        let w = vd * v.transpose();
        debug_assert_eq!(w.nrows(), n);
        w
    }

    /// Entries `W(t)_{0j}` for the requested columns.
    pub fn cavity_row(&self, t: f64, cols: &[usize]) -> Vec<Complex64> {
        let c: Vec<Complex64> = self
            .energies
            .iter()
            .enumerate()
            .map(|(m, e)| Complex64::from_polar(self.vectors[(0, m)], -e * t))
            .collect();
        cols.iter()
            .map(|&j| {
                c.iter()
                    .enumerate()
                    .map(|(m, cm)| cm * self.vectors[(j, m)])
                    .sum()
            })
            .collect()
    }

    /// Exact transport of all moments to time `t`.
    pub fn transport(&self, init: &GaussianMoments, t: f64) -> GaussianMoments {
        let w = self.evolution(t);
        GaussianMoments {
            mean: &w * &init.mean,
            m: w.conjugate() * &init.m * w.transpose(),
            s: &w * &init.s * w.transpose(),
        }
    }
}

/// `W(t) = exp(-iHt)` by Hermitian eigendecomposition.
pub fn one_particle_evolution(h: &ChainHamiltonian, t: f64) -> Result<DMatrix<Complex64>> {
    Ok(ChainPropagator::new(*h)?.evolution(t))
}

/// Joint first and second moments of cavity and chain modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<Complex64>,
    /// `M_ij = ⟨c_i† c_j⟩`.
    pub m: DMatrix<Complex64>,
    /// `S_ij = ⟨c_i c_j⟩`.
    pub s: DMatrix<Complex64>,
}

impl GaussianMoments {
    pub fn vacuum(size: usize) -> Self {
        Self {
            mean: DVector::from_element(size, ZERO),
            m: DMatrix::from_element(size, size, ZERO),
            s: DMatrix::from_element(size, size, ZERO),
        }
    }

    pub fn size(&self) -> usize {
        self.mean.len()
    }

    /// `[[M, S̄], [S, Mᵀ + I]]`, the Gram matrix of `⟨X†X⟩ ≥ 0` for
    /// `X = Σ α_i c_i + β_i c_i†`.
    pub fn extended_matrix(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut x = DMatrix::from_element(2 * n, 2 * n, ZERO);
        x.view_mut((0, 0), (n, n)).copy_from(&self.m);
        x.view_mut((0, n), (n, n)).copy_from(&self.s.conjugate());
        x.view_mut((n, 0), (n, n)).copy_from(&self.s);
        let lower = self.m.transpose() + DMatrix::<Complex64>::identity(n, n);
        x.view_mut((n, n), (n, n)).copy_from(&lower);
        x
    }

    /// Smallest eigenvalue of the extended matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.extended_matrix()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Indices carrying any nonzero first or second moment.
    fn support(&self) -> Vec<usize> {
        (0..self.size())
            .filter(|&i| {
                self.mean[i] != ZERO
                    || self.m.row(i).iter().any(|x| *x != ZERO)
                    || self.m.column(i).iter().any(|x| *x != ZERO)
                    || self.s.row(i).iter().any(|x| *x != ZERO)
            })
            .collect()
    }
}

/// Cavity moments on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityMoments {
    pub grid: TimeGrid,
    pub mean: Vec<Complex64>,
    pub n: Vec<f64>,
    pub s: Vec<Complex64>,
}

/// `u(t) = W(t)₀₀` on the grid.
pub fn oracle_u(prop: &ChainPropagator, grid: TimeGrid) -> Result<Vec<Complex64>> {
    prop.hamiltonian.check_window(grid.t_max())?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|j| prop.cavity_row(grid.t(j), &[0])[0])
        .collect())
}

/// `F(t) = i √(π/2) W(t)₀₁`: the site-basis image of `Σ_k g_k sin k ∫ e^{-iω_k τ} u(t-τ) dτ`.
pub fn oracle_f(prop: &ChainPropagator, grid: TimeGrid) -> Result<Vec<Complex64>> {
    prop.hamiltonian.check_window(grid.t_max())?;
    if prop.hamiltonian.sites == 0 {
        return Ok(vec![ZERO; grid.len()]);
    }
    let c = Complex64::new(0.0, (PI / 2.0).sqrt());
    Ok((0..grid.len())
        .into_par_iter()
        .map(|j| c * prop.cavity_row(grid.t(j), &[1])[0])
        .collect())
}

/// Cavity mean, occupation and two-photon moment from exact transport.
pub fn oracle_moments(
    prop: &ChainPropagator,
    init: &GaussianMoments,
    grid: TimeGrid,
) -> Result<CavityMoments> {
    prop.hamiltonian.check_window(grid.t_max())?;
    if init.size() != prop.hamiltonian.size() {
        return Err(Error::GridMismatch {
            what: "initial moments",
            found: init.size(),
            expected: prop.hamiltonian.size(),
        });
    }
    let support = init.support();
    let rows: Vec<(Complex64, f64, Complex64)> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let w = prop.cavity_row(grid.t(j), &support);
            let mut mean = ZERO;
            let mut n = ZERO;
            let mut s = ZERO;
            for (a, &ia) in w.iter().zip(&support) {
                mean += a * init.mean[ia];
                for (b, &ib) in w.iter().zip(&support) {
                    n += a.conj() * init.m[(ia, ib)] * b;
                    s += a * init.s[(ia, ib)] * b;
                }
            }
            (mean, n.re, s)
        })
        .collect();
    Ok(CavityMoments {
        grid,
        mean: rows.iter().map(|r| r.0).collect(),
        n: rows.iter().map(|r| r.1).collect(),
        s: rows.iter().map(|r| r.2).collect(),
    })
}
