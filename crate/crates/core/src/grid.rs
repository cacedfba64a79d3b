use crate::error::{Error, Result};

/// Uniform time grid `t_j = j * dt`, `j = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 steps, got {n_steps}"
            )));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, t_max]`; the step count is rounded to the nearest integer.
    pub fn with_t_max(dt: f64, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Self::new(dt, (t_max / dt).round() as usize)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.t(j))
    }

    /// Same span with half the step.
    pub fn refined(&self) -> Self {
        Self {
            dt: 0.5 * self.dt,
            n_steps: 2 * self.n_steps,
        }
    }

    pub(crate) fn check_len(&self, what: &'static str, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::GridMismatch {
                what,
                found,
                expected: self.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-0.1, 10).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
        assert!(TimeGrid::new(0.1, 1).is_err());
    }

    #[test]
    fn default_grid_has_ten_thousand_steps() {
        let g = TimeGrid::with_t_max(0.2, 2000.0).unwrap();
        assert_eq!(g.n_steps(), 10_000);
        assert_eq!(g.len(), 10_001);
        assert!((g.t_max() - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn refinement_keeps_span() {
        let g = TimeGrid::new(0.2, 50).unwrap();
        let h = g.refined();
        assert_eq!(h.n_steps(), 100);
        assert_eq!(h.t(100), g.t(50));
    }
}
