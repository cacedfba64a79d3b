//! Adaptive Gauss–Legendre integration of complex-valued integrands on a
//! finite interval.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 40;

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            // Newton iteration on P_n from the Chebyshev guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=ORDER {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

/// Fixed-order rule on `[a, b]`. Returns the integral and the integral of `|f|`.
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
        let v = f(mid + half * x);
        sum += v * *w;
        abs += v.norm() * w;
    }
    (sum * half, abs * half.abs())
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// given by `breaks` and bisecting until the two-level estimates agree to
/// `rel_tol` times the integral of `|f|`.
pub fn integrate<F>(f: F, breaks: &[f64], rel_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let total = breaks[breaks.len() - 1] - breaks[0];
    if total == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }

    // Scale estimate on a doubled panel set.
    let mut scale = 0.0;
    for w in breaks.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        scale += panel(&f, w[0], m).1 + panel(&f, m, w[1]).1;
    }
    if scale == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tol = rel_tol * scale;

    let mut result = Complex64::new(0.0, 0.0);
    let mut unresolved = 0.0;
    let mut stack: Vec<(f64, f64, Complex64, u32)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], panel(&f, w[0], w[1]).0, 0))
        .collect();
    while let Some((a, b, coarse, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = panel(&f, a, m).0;
        let right = panel(&f, m, b).0;
        let fine = left + right;
        let err = (fine - coarse).norm();
        let budget = tol * ((b - a) / total).abs();
        if err <= budget {
            result += fine;
        } else if depth >= MAX_DEPTH {
            result += fine;
            unresolved += err;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    if unresolved > tol {
        return Err(Error::Quadrature {
            residual: unresolved / scale,
            tolerance: rel_tol,
        });
    }
    Ok(result)
}

/// `n + 1` evenly spaced break points on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| a + (b - a) * i as f64 / n as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = rule().weights.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| Complex64::new(x.powi(7), 0.0), &[0.0, 2.0], 1e-12).unwrap();
        assert_relative_eq!(v.re, 32.0, epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_exponential() {
        // \int_0^pi e^{i 40 x} dx
        let breaks = uniform_breaks(0.0, std::f64::consts::PI, 8);
        let v = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), &breaks, 1e-12).unwrap();
        let exact = (Complex64::new(0.0, 40.0 * std::f64::consts::PI).exp() - 1.0)
            / Complex64::new(0.0, 40.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn square_root_edge_converges() {
        let v = integrate(|x| Complex64::new(x.sqrt(), 0.0), &[0.0, 1.0], 1e-10).unwrap();
        assert_relative_eq!(v.re, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = integrate(
            |x| Complex64::new(if x < 0.3 { 1.0 / (0.3 - x) } else { 0.0 }, 0.0),
            &[0.0, 1.0],
            1e-14,
        );
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }
}
