//! Descriptive statistics, least squares and goodness-of-fit helpers shared
//! by the estimators, the study and the Monte Carlo lab.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{LrdError, Result};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Variance with divisor `n`.
pub fn variance_pop(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Variance with divisor `n - 1`.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

pub fn centered(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    x.iter().map(|v| v - m).collect()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Sample skewness (moment estimator, divisor `n`).
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis (moment estimator, divisor `n`).
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// Ordinary least squares fit of `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_se: f64,
    pub residual_sd: f64,
    /// Centered sum of squares of the regressor.
    pub sxx: f64,
    pub n: usize,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(LrdError::Input(format!(
            "regression lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(LrdError::Input("regression needs at least 2 points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(LrdError::DegenerateInput("regressor has no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let (residual_sd, slope_se) = if n > 2 {
        let s2 = rss / (n - 2) as f64;
        (s2.sqrt(), (s2 / sxx).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(OlsFit {
        slope,
        intercept,
        slope_se,
        residual_sd,
        sxx,
        n,
    })
}

/// Quantile with linear interpolation between order statistics
/// (the usual "type 7" definition).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn median(x: &[f64]) -> f64 {
    quantile_sorted(&sorted_copy(x), 0.5)
}

/// Min, quartiles and max, for boxplot emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number(x: &[f64]) -> FiveNumber {
    let s = sorted_copy(x);
    FiveNumber {
        min: s.first().copied().unwrap_or(f64::NAN),
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s.last().copied().unwrap_or(f64::NAN),
    }
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> f64 {
    let s = sorted_copy(x);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Result of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// KS test with the small-sample corrected asymptotic p-value
/// `Q((sqrt(n) + 0.12 + 0.11/sqrt(n)) D)`.
pub fn ks_test<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> KsTest {
    let d = ks_distance(x, cdf);
    let en = (x.len() as f64).sqrt();
    KsTest {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    }
}

pub fn ks_uniform(x: &[f64]) -> KsTest {
    ks_test(x, |v| v.clamp(0.0, 1.0))
}

/// KS distance to the normal law with the sample mean and standard deviation.
pub fn ks_fitted_normal(x: &[f64]) -> f64 {
    let m = mean(x);
    let s = std_dev(x);
    let normal = Normal::new(m, s.max(f64::MIN_POSITIVE)).expect("valid normal");
    ks_distance(x, |v| normal.cdf(v))
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsTest {
    let sa = sorted_copy(a);
    let sb = sorted_copy(b);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    KsTest {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    }
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Sample autocovariances (divisor `n`, mean removed) at lags `0..=max_lag`,
/// computed through a zero-padded FFT.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let max_lag = max_lag.min(n.saturating_sub(1));
    let m = mean(x);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..size)
        .map(|i| {
            if i < n {
                Complex64::new(x[i] - m, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    (0..=max_lag)
        .map(|k| buf[k].re / (size as f64 * n as f64))
        .collect()
}

/// Bartlett-kernel long-run variance `sum_k w_k gamma(k)` with weights
/// `1 - |k|/(bandwidth + 1)`.
pub fn long_run_variance_bartlett(x: &[f64], bandwidth: usize) -> f64 {
    let acov = autocovariance(x, bandwidth);
    let mut s = acov[0];
    for (k, g) in acov.iter().enumerate().skip(1) {
        let w = 1.0 - k as f64 / (bandwidth as f64 + 1.0);
        s += 2.0 * w * g;
    }
    s
}
