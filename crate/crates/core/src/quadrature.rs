//! Quadrature rules for expectations under the standard Gaussian law.
//!
//! Smooth integrands use Gauss-Hermite nodes rescaled to the probabilists'
//! weight `exp(-x^2/2)/sqrt(2 pi)`. Integrands with jumps or kinks use
//! composite Gauss-Legendre panels on a truncated line, with panel edges
//! placed at the breakpoints so that no panel straddles a singularity.

use std::f64::consts::PI;

use crate::error::{LrdError, Result};
use crate::stats::normal_pdf;

/// Nodes and weights for `E f(Z)`, `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct GaussianRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Half-width of the truncated line used by the composite rule. The
/// Gaussian tail beyond 12 is below 1e-32.
const TRUNCATION: f64 = 12.0;
const PANEL_WIDTH: f64 = 0.5;
const PANEL_NODES: usize = 20;

impl GaussianRule {
    /// `n`-point Gauss-Hermite rule, exact for polynomials of degree `2n - 1`.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LrdError::Input("quadrature order must be positive".into()));
        }
        let (t, w) = physicists_hermite(n)?;
        let scale = PI.sqrt();
        Ok(GaussianRule {
            nodes: t.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
            weights: w.iter().map(|v| v / scale).collect(),
        })
    }

    /// Composite Gauss-Legendre rule on `[-12, 12]` with extra panel edges at
    /// `breakpoints`.
    pub fn piecewise(breakpoints: &[f64]) -> Self {
        let mut edges: Vec<f64> = vec![-TRUNCATION, TRUNCATION];
        edges.extend(
            breakpoints
                .iter()
                .copied()
                .filter(|b| b.is_finite() && b.abs() < TRUNCATION),
        );
        edges.sort_by(|a, b| a.total_cmp(b));
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let (gl_x, gl_w) = gauss_legendre(PANEL_NODES);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let panels = ((b - a) / PANEL_WIDTH).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                for (x, w) in gl_x.iter().zip(&gl_w) {
                    let node = mid + 0.5 * h * x;
                    nodes.push(node);
                    weights.push(0.5 * h * w * normal_pdf(node));
                }
            }
        }
        GaussianRule { nodes, weights }
    }

    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Hermite nodes and weights for the weight `exp(-t^2)`, by Newton
/// iteration on the orthonormal Hermite recurrence.
fn physicists_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LrdError::Numeric(format!(
                "Gauss-Hermite node {i} of {n} did not converge"
            )));
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_factorial_moment(k: u32) -> f64 {
        // E Z^k for even k is (k-1)!!
        if k % 2 == 1 {
            return 0.0;
        }
        (1..k).step_by(2).map(|v| v as f64).product()
    }

    #[test]
    fn gauss_hermite_moments() {
        for n in [8, 64, 128] {
            let rule = GaussianRule::gauss_hermite(n).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-13);
            for k in 0..12u32 {
                let e = rule.expectation(|x| x.powi(k as i32));
                let exact = double_factorial_moment(k);
                assert!(
                    (e - exact).abs() <= 1e-10 * exact.max(1.0),
                    "n={n} k={k} {e}"
                );
            }
        }
    }

    #[test]
    fn piecewise_rule_handles_indicator() {
        let rule = GaussianRule::piecewise(&[0.0, 0.3]);
        let p = rule.expectation(|x| if x <= 0.3 { 1.0 } else { 0.0 });
        assert_relative_eq!(p, crate::stats::normal_cdf(0.3), epsilon = 1e-13);
        let abs_mean = rule.expectation(f64::abs);
        assert_relative_eq!(abs_mean, (2.0 / PI).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(s, 2.0 / 9.0, epsilon = 1e-14);
    }
}
