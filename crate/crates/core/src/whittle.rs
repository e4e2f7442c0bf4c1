//! The FARIMA(0, d, 0) spectral model used by the Whittle fit, its Fourier
//! coefficients `a_d(n)`, and the first-order coefficient `rho_1` that
//! decides the Whittle convergence rate for `X = G(Y)`.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::hermite::{cross_covariance_expansion, factorial, HermiteExpansion};
use crate::process::farima_autocovariance;
use crate::quadrature::gauss_legendre;

/// Grid size used when inverting `1 / g_d` numerically.
pub const DEFAULT_INVERSION_GRID: usize = 1 << 18;

/// `f(l) = sigma2 g_d(l)` with `g_d(l) = (2 sin(l/2))^{-2d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub d: f64,
    pub sigma2: f64,
}

impl SpectralModel {
    pub fn new(d: f64, sigma2: f64) -> Self {
        SpectralModel { d, sigma2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > -0.5 && self.d < 0.5) {
            return Err(LrdError::Domain(format!(
                "d = {} outside (-1/2, 1/2)",
                self.d
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(LrdError::Domain(format!(
                "sigma2 = {} must be positive",
                self.sigma2
            )));
        }
        Ok(())
    }

    pub fn g(&self, lambda: f64) -> f64 {
        (2.0 * (lambda / 2.0).sin().abs()).powf(-2.0 * self.d)
    }

    pub fn spectral_density(&self, lambda: f64) -> f64 {
        self.sigma2 * self.g(lambda)
    }

    /// `int_{-pi}^{pi} log g_d`, zero for this family; evaluated numerically
    /// by splitting off the `log l` singularity.
    pub fn log_g_integral(&self) -> f64 {
        let (nodes, weights) = gauss_legendre(64);
        // int_0^pi [log(2 sin(l/2)) - log l] dl + int_0^pi log l dl
        let smooth: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w): (&f64, &f64)| {
                let l: f64 = 0.5 * PI * (t + 1.0);
                let v = if l == 0.0 {
                    0.0
                } else {
                    (2.0 * (l / 2.0).sin()).ln() - l.ln()
                };
                0.5 * PI * w * v
            })
            .sum();
        let half = smooth + PI * PI.ln() - PI;
        -4.0 * self.d * half
    }

    /// `w_d = int g_d d^2/dd^2 [1/g_d] = 4 int log^2(2 sin(l/2)) = 2 pi^3 / 3`.
    pub fn curvature(&self) -> f64 {
        2.0 * PI.powi(3) / 3.0
    }

    /// `a_d(n)` for `n = 0..=max_lag`, by midpoint-rule inversion of `1/g_d`
    /// on a grid of `grid` points.
    /// For `d < 0` the integrand is singular at the origin and the closed
    /// form is used instead.
    pub fn a_coefficients(&self, max_lag: usize, grid: usize) -> Result<Vec<f64>> {
        let d = self.d;
        if d < 0.0 {
            return a_coefficients_exact(d, max_lag);
        }
        invert(|l| (2.0 * (l / 2.0).sin()).powf(2.0 * d), max_lag, grid)
    }

    /// `d/dd a_d(n)` for `n = 0..=max_lag`, inverting
    /// `2 log(2 sin(l/2)) (2 sin(l/2))^{2d}`.
    pub fn grad_a_coefficients(&self, max_lag: usize, grid: usize) -> Result<Vec<f64>> {
        let d = self.d;
        if d < 0.0 {
            let h = 1e-6;
            let hi = a_coefficients_exact(d + h, max_lag)?;
            let lo = a_coefficients_exact(d - h, max_lag)?;
            return Ok(hi
                .iter()
                .zip(&lo)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect());
        }
        invert(
            |l| {
                let s = 2.0 * (l / 2.0).sin();
                2.0 * s.ln() * s.powf(2.0 * d)
            },
            max_lag,
            grid,
        )
    }
}

/// `int_{-pi}^{pi} e^{i n l} h(l) dl` for an even `h`, `n = 0..=max_lag`.
/// The midpoint grid avoids evaluating `h` at the origin.
fn invert(h: impl Fn(f64) -> f64, max_lag: usize, grid: usize) -> Result<Vec<f64>> {
    if grid < 2 * max_lag + 2 {
        return Err(LrdError::Input(format!(
            "inversion grid {grid} too coarse for {max_lag} lags"
        )));
    }
    let step = 2.0 * PI / grid as f64;
    // l_k = (k + 1/2) step on (0, 2 pi); h has period 2 pi.
    let mut buf: Vec<Complex64> = (0..grid)
        .map(|k| {
            let l = (k as f64 + 0.5) * step;
            Complex64::new(h(l), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    Ok((0..=max_lag)
        .map(|n| {
            let phase = Complex64::from_polar(1.0, 0.5 * step * n as f64);
            (buf[n] * phase).re * step
        })
        .collect())
}

/// Closed form `a_d(n) = 2 pi gamma_{-d}(n)` from the FARIMA(0, -d, 0)
/// autocovariance.
pub fn a_coefficients_exact(d: f64, max_lag: usize) -> Result<Vec<f64>> {
    Ok(farima_autocovariance(-d, max_lag)?
        .into_iter()
        .map(|v| 2.0 * PI * v)
        .collect())
}

/// Lags `-L..=L` from a one-sided sequence at `0..=L`.
pub fn symmetric(one_sided: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = one_sided[1..].iter().rev().copied().collect();
    out.extend_from_slice(one_sided);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rho1Report {
    pub value: f64,
    /// Contribution of `E[G'(Y)] E[G(Y)] sum_n grad_a(n)`.
    pub mean_term: f64,
    /// Bound on the part lost to Hermite truncation and the finite lag window.
    pub truncation_bound: f64,
    pub max_lag: usize,
    pub max_order: usize,
}

impl Rho1Report {
    /// True when `|rho_1|` clears ten times the truncation bound.
    pub fn is_nonzero(&self) -> bool {
        self.value.abs() > 10.0 * self.truncation_bound
    }
}

/// `rho_1 = 2 sum_n E[G'(Y(n)) G(Y(0))] grad_a(n)`.
///
/// `rho` and `grad_a` are indexed over lags `-L..=L`. The lag-`n`
/// expectation is `sum_{m>=0} m! g'_m g_m rho(n)^m`, the `m = 0` mean
/// product included.
pub fn compute_rho1(
    g: &HermiteExpansion,
    gprime: &HermiteExpansion,
    rho: &[f64],
    grad_a: &[f64],
) -> Result<f64> {
    Ok(compute_rho1_report(g, gprime, rho, grad_a)?.value)
}

pub fn compute_rho1_report(
    g: &HermiteExpansion,
    gprime: &HermiteExpansion,
    rho: &[f64],
    grad_a: &[f64],
) -> Result<Rho1Report> {
    if rho.len() != grad_a.len() {
        return Err(LrdError::Input(format!(
            "rho has {} lags but grad_a has {}",
            rho.len(),
            grad_a.len()
        )));
    }
    if rho.len().is_multiple_of(2) || rho.is_empty() {
        return Err(LrdError::Input("lag sequences must cover -L..=L".into()));
    }
    let max_order = g.truncation_order.min(gprime.truncation_order);
    let lag_max = rho.len() / 2;
    let mean_product = gprime.mean() * g.mean();
    let terms: Vec<f64> = rho
        .iter()
        .zip(grad_a)
        .map(|(r, a)| Ok(cross_covariance_expansion(gprime, g, *r, max_order)? * a))
        .collect::<Result<_>>()?;
    let sum_grad: f64 = grad_a.iter().sum();
    let mean_term = 2.0 * mean_product * sum_grad;
    let value = 2.0 * terms.iter().sum::<f64>() + mean_term;

    // Hermite tail: Cauchy-Schwarz on the orders above the truncation.
    let tail_var = |e: &HermiteExpansion| (e.residual_fraction * e.l2_norm_sq).max(0.0);
    let hermite_tail = (tail_var(g) * tail_var(gprime)).sqrt();
    let hermite_bound: f64 = 2.0
        * rho
            .iter()
            .zip(grad_a)
            .map(|(r, a)| hermite_tail * r.abs().powi(max_order as i32 + 1) * a.abs())
            .sum::<f64>();
    // Lag tail: extrapolate the power-law decay of |term(n)| past L.
    let t = |n: usize| terms[lag_max + n].abs();
    let lag_bound = if lag_max >= 4 && t(lag_max) > 0.0 && t(lag_max / 2) > 0.0 {
        let alpha = (t(lag_max / 2) / t(lag_max)).ln() / 2f64.ln() - 1.0;
        if alpha > 0.0 {
            4.0 * t(lag_max) * lag_max as f64 / alpha
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    };
    // sum_n grad_a(n) vanishes over all lags, so its truncated value is the
    // tail of the mean term.
    let mean_bound = mean_term.abs();
    Ok(Rho1Report {
        value,
        mean_term,
        truncation_bound: hermite_bound + lag_bound + mean_bound,
        max_lag: lag_max,
        max_order,
    })
}

/// `E[a(Y(n)) b(Y(0))]` including means, for each correlation in `rho`.
pub fn lagged_cross_moments(
    a: &HermiteExpansion,
    b: &HermiteExpansion,
    rho: &[f64],
) -> Result<Vec<f64>> {
    let m = a.truncation_order.min(b.truncation_order);
    rho.iter()
        .map(|r| {
            Ok(a.mean() * b.mean()
                + (1..=m)
                    .map(|k| factorial(k) * a.coefficient(k) * b.coefficient(k) * r.powi(k as i32))
                    .sum::<f64>())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_expand, DEFAULT_QUAD_ORDER};
    use crate::quadrature::GaussianRule;
    use crate::transform::TransformSpec;
    use approx::assert_relative_eq;

    #[test]
    fn log_g_integrates_to_zero() {
        for d in [0.1, 0.3, 0.45] {
            assert!(SpectralModel::new(d, 1.0).log_g_integral().abs() < 1e-8);
        }
    }

    #[test]
    fn curvature_matches_numerical_integral() {
        // 4 int_{-pi}^{pi} log^2(2 sin(l/2)) dl on a fine midpoint grid after
        // removing the log^2 singularity analytically near zero.
        let n = 2_000_000;
        let h = PI / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            let l = (k as f64 + 0.5) * h;
            let v = (2.0 * (l / 2.0).sin()).ln();
            s += v * v * h;
        }
        let numeric = 8.0 * s;
        let model = SpectralModel::new(0.2, 1.0);
        assert_relative_eq!(model.curvature(), numeric, max_relative = 1e-5);
    }

    #[test]
    fn fft_inversion_matches_closed_form() {
        for d in [-0.3, 0.0, 0.1, 0.3, 0.45] {
            let m = SpectralModel::new(d, 1.0);
            let fft = m.a_coefficients(50, DEFAULT_INVERSION_GRID).unwrap();
            let exact = a_coefficients_exact(d, 50).unwrap();
            for (a, b) in fft.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-6, "d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gradient_matches_difference_of_closed_forms() {
        let d = 0.25;
        let m = SpectralModel::new(d, 1.0);
        let grad = m.grad_a_coefficients(30, DEFAULT_INVERSION_GRID).unwrap();
        let hi = a_coefficients_exact(d + 1e-5, 30).unwrap();
        let lo = a_coefficients_exact(d - 1e-5, 30).unwrap();
        for n in 0..=30 {
            let fd = (hi[n] - lo[n]) / 2e-5;
            assert!((grad[n] - fd).abs() < 1e-5, "n={n}: {} vs {fd}", grad[n]);
        }
    }

    #[test]
    fn convolution_identity() {
        let d = 0.3;
        let lags = 200_000;
        let a = a_coefficients_exact(d, lags).unwrap();
        let gamma = farima_autocovariance(d, lags).unwrap();
        let s: f64 = a[0] * gamma[0] + 2.0 * (1..=lags).map(|k| a[k] * gamma[k]).sum::<f64>();
        assert!((s - 2.0 * PI).abs() < 1e-4, "{s}");

        // the same with the FFT-inverted coefficients on a shorter window
        let m = SpectralModel::new(d, 1.0);
        let lags = 20_000;
        let a = m.a_coefficients(lags, 1 << 20).unwrap();
        let s: f64 = a[0] * gamma[0] + 2.0 * (1..=lags).map(|k| a[k] * gamma[k]).sum::<f64>();
        assert!((s - 2.0 * PI).abs() < 1e-3, "{s}");
    }

    fn expansion(s: &str) -> HermiteExpansion {
        let t: TransformSpec = s.parse().unwrap();
        hermite_expand(&t, 10, DEFAULT_QUAD_ORDER).unwrap()
    }

    fn farima_inputs(d: f64, lags: usize) -> (Vec<f64>, Vec<f64>) {
        let gamma = farima_autocovariance(d, lags).unwrap();
        let rho: Vec<f64> = gamma.iter().map(|v| v / gamma[0]).collect();
        let grad = SpectralModel::new(d, 1.0)
            .grad_a_coefficients(lags, DEFAULT_INVERSION_GRID)
            .unwrap();
        (symmetric(&rho), symmetric(&grad))
    }

    /// Direct two-dimensional Gauss-Hermite evaluation of
    /// `E[G'(Y(n)) G(Y(0))]` for correlation `r`.
    fn direct_moment(g: &TransformSpec, gp: &TransformSpec, r: f64) -> f64 {
        let rule = GaussianRule::gauss_hermite(60).unwrap();
        let c = (1.0 - r * r).sqrt();
        let mut s = 0.0;
        for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
            for (z, wz) in rule.nodes.iter().zip(&rule.weights) {
                s += wx * wz * gp.eval(r * x + c * z) * g.eval(*x);
            }
        }
        s
    }

    #[test]
    fn rho1_vanishes_for_identity() {
        let (rho, grad) = farima_inputs(0.2, 200);
        let g = expansion("identity");
        // G' = 1 has no variance, so hermite_expand refuses it; build it by hand
        let gp = HermiteExpansion {
            coefficients: {
                let mut c = vec![0.0; 11];
                c[0] = 1.0;
                c
            },
            truncation_order: 10,
            l2_norm_sq: 0.0,
            residual_fraction: 0.0,
        };
        let r = compute_rho1_report(&g, &gp, &rho, &grad).unwrap();
        assert!(r.value.abs() <= r.truncation_bound.max(1e-12));
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn rho1_is_linear_in_grad_a() {
        let (rho, grad) = farima_inputs(0.2, 100);
        let g = expansion("poly:0,1,0.5,0.2");
        let gp = expansion("poly:1,1,0.6");
        let one = compute_rho1(&g, &gp, &rho, &grad).unwrap();
        let doubled: Vec<f64> = grad.iter().map(|v| 2.0 * v).collect();
        let two = compute_rho1(&g, &gp, &rho, &doubled).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-12);
        assert!(compute_rho1(&g, &gp, &rho, &grad[1..]).is_err());
    }

    #[test]
    fn rho1_matches_direct_evaluation_and_clears_bound() {
        let d = 0.2;
        let lags = 200;
        let (rho, grad) = farima_inputs(d, lags);
        let t: TransformSpec = "poly:-0.5,1,0.5,0.2".parse().unwrap();
        let tp = t.derivative().unwrap();
        let g = hermite_expand(&t, 10, DEFAULT_QUAD_ORDER).unwrap();
        let gp = hermite_expand(&tp, 10, DEFAULT_QUAD_ORDER).unwrap();
        let report = compute_rho1_report(&g, &gp, &rho, &grad).unwrap();
        let direct: f64 = 2.0
            * rho
                .iter()
                .zip(&grad)
                .map(|(r, a)| direct_moment(&t, &tp, *r) * a)
                .sum::<f64>();
        assert_relative_eq!(report.value, direct, max_relative = 1e-8);
        assert!(report.is_nonzero(), "{report:?}");
    }

    #[test]
    fn square_has_zero_rho1() {
        // G = x^2 = H_2 + 1 and G' = 2 H_1 share no Hermite order, and the
        // mean term multiplies E[G'] = 0.
        let (rho, grad) = farima_inputs(0.2, 200);
        let g = expansion("square");
        let gp = expansion("poly:0,2");
        let r = compute_rho1_report(&g, &gp, &rho, &grad).unwrap();
        assert!(r.value.abs() < 1e-10);
        assert!(!r.is_nonzero());
    }

    #[test]
    fn symmetric_layout() {
        assert_eq!(symmetric(&[3.0, 2.0, 1.0]), vec![1.0, 2.0, 3.0, 2.0, 1.0]);
    }
}
