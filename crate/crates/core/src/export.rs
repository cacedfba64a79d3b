//! CSV export with `%.12e` number formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::correlations::CorrelationFunctions;
use crate::grid::TimeGrid;
use crate::observables::{squeezing_decomposition, uncertainty_product, ObservableTrajectory, PHYSICAL_TOL};
use crate::oracle::CavityMoments;
use crate::propagator::PropagatorSolution;
use crate::reservoir::KernelSeries;
use crate::tcl::MasterEqCoefficients;

/// Formats like C's `%.12e`: twelve mantissa digits, signed exponent of at
/// least two digits.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

enum Cell {
    Num(f64),
    Flag(bool),
}

fn write_table<W: Write>(mut w: W, header: &[&str], rows: impl Iterator<Item = Vec<Cell>>) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match c {
                Cell::Num(x) => line.push_str(&fmt_e12(*x)),
                Cell::Flag(b) => line.push(if *b { '1' } else { '0' }),
            }
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

use Cell::{Flag, Num};

pub fn write_kernel(path: &Path, k: &KernelSeries) -> io::Result<()> {
    let g = k.grid;
    write_table(
        create(path)?,
        &["tau", "re", "im"],
        k.values.iter().enumerate().map(|(j, v)| vec![Num(g.t(j)), Num(v.re), Num(v.im)]),
    )
}

pub fn write_propagator(path: &Path, sol: &PropagatorSolution) -> io::Result<()> {
    let g = sol.grid;
    write_table(
        create(path)?,
        &["t", "re_u", "im_u", "abs_u2", "re_udot", "im_udot"],
        (0..g.len()).map(|j| {
            let (u, ud) = (sol.u[j], sol.u_dot[j]);
            vec![Num(g.t(j)), Num(u.re), Num(u.im), Num(u.norm_sqr()), Num(ud.re), Num(ud.im)]
        }),
    )
}

pub fn write_correlations(path: &Path, c: &CorrelationFunctions) -> io::Result<()> {
    let g = c.grid;
    write_table(
        create(path)?,
        &["t", "re_nu1", "im_nu1", "re_nu2", "im_nu2", "v1", "re_v2", "im_v2"],
        (0..g.len()).map(|j| {
            vec![
                Num(g.t(j)),
                Num(c.nu1[j].re),
                Num(c.nu1[j].im),
                Num(c.nu2[j].re),
                Num(c.nu2[j].im),
                Num(c.v1[j]),
                Num(c.v2[j].re),
                Num(c.v2[j].im),
            ]
        }),
    )
}

const OBSERVABLE_HEADER: [&str; 10] = [
    "t", "re_mean", "im_mean", "n", "re_s", "im_s", "r", "theta", "nbar", "physical",
];

pub fn write_observables(path: &Path, t: &ObservableTrajectory) -> io::Result<()> {
    let g = t.grid;
    write_table(
        create(path)?,
        &OBSERVABLE_HEADER,
        (0..g.len()).map(|j| {
            vec![
                Num(g.t(j)),
                Num(t.mean[j].re),
                Num(t.mean[j].im),
                Num(t.n[j]),
                Num(t.s[j].re),
                Num(t.s[j].im),
                Num(t.r[j]),
                Num(t.theta[j]),
                Num(t.nbar[j]),
                Flag(t.physical_flags[j]),
            ]
        }),
    )
}

/// Oracle moments in the observables schema, for direct diffing.
pub fn write_oracle(path: &Path, m: &CavityMoments) -> io::Result<()> {
    let g = m.grid;
    write_table(
        create(path)?,
        &OBSERVABLE_HEADER,
        (0..g.len()).map(|j| {
            let sq = squeezing_decomposition(m.n[j].max(0.0), m.s[j]);
            vec![
                Num(g.t(j)),
                Num(m.mean[j].re),
                Num(m.mean[j].im),
                Num(m.n[j]),
                Num(m.s[j].re),
                Num(m.s[j].im),
                Num(sq.r),
                Num(sq.theta),
                Num(sq.nbar),
                Flag(uncertainty_product(m.n[j], m.s[j]) >= 0.25 - PHYSICAL_TOL),
            ]
        }),
    )
}

/// Coefficients; flagged nodes keep their row with `nan` values and `valid = 0`.
pub fn write_coefficients(path: &Path, c: &MasterEqCoefficients) -> io::Result<()> {
    let g = c.grid;
    write_table(
        create(path)?,
        &["t", "delta", "gamma1", "gamma2", "re_gamma3", "im_gamma3", "valid"],
        (0..g.len()).map(|j| {
            vec![
                Num(g.t(j)),
                Num(c.delta[j]),
                Num(c.gamma1[j]),
                Num(c.gamma2[j]),
                Num(c.gamma3[j].re),
                Num(c.gamma3[j].im),
                Flag(c.valid_flags[j]),
            ]
        }),
    )
}

pub fn write_comparison(
    path: &Path,
    grid: TimeGrid,
    correlated: &ObservableTrajectory,
    uncorrelated: &ObservableTrajectory,
) -> io::Result<()> {
    write_table(
        create(path)?,
        &["t", "n_correlated", "n_uncorrelated", "difference", "r_correlated", "r_uncorrelated"],
        (0..grid.len()).map(|j| {
            vec![
                Num(grid.t(j)),
                Num(correlated.n[j]),
                Num(uncorrelated.n[j]),
                Num(correlated.n[j] - uncorrelated.n[j]),
                Num(correlated.r[j]),
                Num(uncorrelated.r[j]),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_exponent_style() {
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e12(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_e12(6.02214076e23), "6.022140760000e+23");
        assert_eq!(fmt_e12(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_e12(f64::NAN), "nan");
    }

    #[test]
    fn kernel_table_layout() {
        let dir = std::env::temp_dir().join(format!("nmcavity-export-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = TimeGrid::new(0.5, 2).unwrap();
        let k = KernelSeries::zeros(grid);
        let p = dir.join("k.csv");
        write_kernel(&p, &k).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tau,re,im");
        assert_eq!(lines[2], "5.000000000000e-01,0.000000000000e+00,0.000000000000e+00");
        assert_eq!(lines.len(), 4);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
