//! Hurst index estimators: aggregated variance, log-periodogram regression
//! (GPH), local Whittle, and the parametric FARIMA(0, d, 0) Whittle fit.
//!
//! All of them subtract the sample mean first.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::error::{LrdError, Result};
use crate::optimize::golden_section;
use crate::spectral::{periodogram, Periodogram};
use crate::stats;
use crate::whittle::SpectralModel;

/// Smallest series length the aggregated-variance estimator accepts.
pub const AGGVAR_MIN_LEN: usize = 300;
pub const AGGVAR_BLOCKS: usize = 15;
pub const AGGVAR_MIN_BLOCK: usize = 10;
pub const WHITTLE_MIN_LEN: usize = 512;
pub const MIN_FREQUENCIES: usize = 8;
const OPT_TOL: f64 = 1e-6;
const LW_RANGE: (f64, f64) = (-0.49, 0.99);
const WHITTLE_RANGE: (f64, f64) = (-0.49, 0.49);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Aggvar,
    Gph,
    LocalWhittle,
    WhittleFarima,
}

impl Method {
    /// Short tag used on the command line and in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Aggvar => "aggvar",
            Method::Gph => "gph",
            Method::LocalWhittle => "lw",
            Method::WhittleFarima => "whittle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = LrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aggvar" | "variance-aggregation" => Ok(Method::Aggvar),
            "gph" | "periodogram" | "local-periodogram" => Ok(Method::Gph),
            "lw" | "local-whittle" => Ok(Method::LocalWhittle),
            "whittle" | "whittle-farima" => Ok(Method::WhittleFarima),
            other => Err(LrdError::Parse(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    Frequencies(usize),
    Blocks(Vec<usize>),
    /// Parametric fit over every Fourier frequency.
    Full(usize),
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Frequencies(m) | Bandwidth::Full(m) => write!(f, "{m}"),
            Bandwidth::Blocks(b) => write!(
                f,
                "{}",
                b.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Regression points `(x, y)` for aggvar and GPH.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub points: Vec<(f64, f64)>,
    /// Objective evaluations `(d, value)` for the Whittle-type estimators.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub objective_trace: Vec<(f64, f64)>,
    pub boundary_hit: bool,
    /// Frequencies dropped because their ordinate was zero.
    pub dropped: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma2_hat: Option<f64>,
    /// Aggregated-variance estimate before the small-sample correction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uncorrected_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub h_hat: f64,
    pub d_hat: f64,
    pub method: Method,
    pub bandwidth: Bandwidth,
    pub stderr: Option<f64>,
    pub n: usize,
    pub diagnostics: Diagnostics,
}

impl EstimatorResult {
    fn from_d(
        d_hat: f64,
        method: Method,
        bandwidth: Bandwidth,
        stderr: Option<f64>,
        n: usize,
        diagnostics: Diagnostics,
    ) -> Self {
        let h_hat = d_hat + 0.5;
        EstimatorResult {
            h_hat,
            d_hat: h_hat - 0.5,
            method,
            bandwidth,
            stderr,
            n,
            diagnostics,
        }
    }

    /// `method,N,bandwidth,H_hat,d_hat,stderr`.
    pub fn csv_line(&self) -> String {
        use crate::series::format_f64;
        format!(
            "{},{},{},{},{},{}",
            self.method,
            self.n,
            self.bandwidth,
            format_f64(self.h_hat),
            format_f64(self.d_hat),
            self.stderr.map(format_f64).unwrap_or_default()
        )
    }
}

pub const CSV_HEADER: &str = "method,N,bandwidth,H_hat,d_hat,stderr";

/// Default bandwidth for each semiparametric method.
pub fn default_bandwidth(method: Method, n: usize) -> usize {
    match method {
        Method::Gph => (n as f64).sqrt().floor() as usize,
        Method::LocalWhittle => (n as f64).powf(2.0 / 3.0).floor() as usize,
        Method::Aggvar => AGGVAR_BLOCKS,
        Method::WhittleFarima => (n - 1) / 2,
    }
}

/// Runs `method` with its default or the given bandwidth. For aggvar the
/// bandwidth is the number of block sizes.
pub fn estimate(x: &[f64], method: Method, bandwidth: Option<usize>) -> Result<EstimatorResult> {
    let n = x.len();
    match method {
        Method::Aggvar => {
            let blocks = default_blocks(n, bandwidth.unwrap_or(AGGVAR_BLOCKS))?;
            estimate_aggvar(x, &blocks)
        }
        Method::Gph => estimate_gph(x, bandwidth.unwrap_or_else(|| default_bandwidth(method, n))),
        Method::LocalWhittle => {
            estimate_local_whittle(x, bandwidth.unwrap_or_else(|| default_bandwidth(method, n)))
        }
        Method::WhittleFarima => whittle_farima(x),
    }
}

/// `count` logarithmically spaced block sizes from 10 to `N/4`, rounded and
/// deduplicated.
pub fn default_blocks(n: usize, count: usize) -> Result<Vec<usize>> {
    let max = n / 4;
    if max <= AGGVAR_MIN_BLOCK || count < 3 {
        return Err(LrdError::Input(format!(
            "series of length {n} too short for a block grid"
        )));
    }
    let (lo, hi) = ((AGGVAR_MIN_BLOCK as f64).ln(), (max as f64).ln());
    let mut blocks: Vec<usize> = (0..count)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as usize
        })
        .collect();
    blocks.dedup();
    Ok(blocks)
}

/// Aggregated variance: OLS of log Var(block means) on log block size,
/// `H = 1 + slope / 2`.
///
/// With only `k = N/m` blocks the sample variance of the block means is
/// biased downward by `(k - k^{2H-1}) / (k - 1)` and its logarithm by the
/// log-chi-square offset `psi((k-1)/2) - log((k-1)/2)`. Both depend on the
/// block count, which tilts the regression, so the fit is repeated with the
/// log variances corrected at the current `H` until it settles. The plain
/// regression value is kept in the diagnostics.
pub fn estimate_aggvar(x: &[f64], blocks: &[usize]) -> Result<EstimatorResult> {
    let n = x.len();
    if n < AGGVAR_MIN_LEN {
        return Err(LrdError::Input(format!(
            "aggregated variance needs N >= {AGGVAR_MIN_LEN}, got {n}"
        )));
    }
    if blocks.len() < 3 {
        return Err(LrdError::Input("need at least 3 block sizes".into()));
    }
    if blocks.windows(2).any(|w| w[1] <= w[0]) || blocks[0] == 0 {
        return Err(LrdError::Input(
            "block sizes must be strictly increasing".into(),
        ));
    }
    if *blocks.last().unwrap() > n / 4 {
        return Err(LrdError::Input("largest block exceeds N/4".into()));
    }
    let xc = stats::centered(x);
    let mut points = Vec::with_capacity(blocks.len());
    let mut counts = Vec::with_capacity(blocks.len());
    for &m in blocks {
        let k = n / m;
        let means: Vec<f64> = (0..k)
            .map(|b| xc[b * m..(b + 1) * m].iter().sum::<f64>() / m as f64)
            .collect();
        let v = stats::variance(&means);
        if !(v > 0.0) {
            return Err(LrdError::DegenerateInput(format!(
                "block means of size {m} have zero variance"
            )));
        }
        points.push(((m as f64).ln(), v.ln()));
        counts.push(k as f64);
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().cloned().unzip();
    let plain = stats::ols(&lx, &ly)?;
    let mut fit = plain;
    let mut h = 1.0 + plain.slope / 2.0;
    for _ in 0..AGGVAR_MAX_ITER {
        let hc = h.clamp(0.01, 0.99);
        let adjusted: Vec<f64> = ly
            .iter()
            .zip(&counts)
            .map(|(v, k)| v - aggvar_log_bias(*k, hc))
            .collect();
        fit = stats::ols(&lx, &adjusted)?;
        let next = 1.0 + fit.slope / 2.0;
        let done = (next - h).abs() < 1e-10;
        h = next;
        if done {
            break;
        }
    }
    Ok(EstimatorResult::from_d(
        h - 0.5,
        Method::Aggvar,
        Bandwidth::Blocks(blocks.to_vec()),
        Some(fit.slope_se / 2.0),
        n,
        Diagnostics {
            points,
            uncorrected_h: Some(1.0 + plain.slope / 2.0),
            ..Default::default()
        },
    ))
}

const AGGVAR_MAX_ITER: usize = 50;

/// Expected offset of `log S^2` from `log Var` for `k` block means of an
/// fGn-like sequence with index `h`.
fn aggvar_log_bias(k: f64, h: f64) -> f64 {
    let a = (k - 1.0) / 2.0;
    ((k - k.powf(2.0 * h - 1.0)) / (k - 1.0)).ln() + digamma(a) - a.ln()
}

fn check_bandwidth(p: &Periodogram, m: usize) -> Result<()> {
    if m < MIN_FREQUENCIES || m > p.len() {
        return Err(LrdError::Input(format!(
            "bandwidth {m} outside [{MIN_FREQUENCIES}, {}]",
            p.len()
        )));
    }
    Ok(())
}

/// Log-periodogram regression of `log I(l_j)` on `-log(4 sin^2(l_j / 2))`
/// over the first `m` frequencies; the slope is `d`.
pub fn estimate_gph(x: &[f64], m: usize) -> Result<EstimatorResult> {
    let p = periodogram(x)?;
    estimate_gph_from(&p, m)
}

pub fn estimate_gph_from(p: &Periodogram, m: usize) -> Result<EstimatorResult> {
    check_bandwidth(p, m)?;
    let mut points = Vec::with_capacity(m);
    let mut dropped = 0;
    for j in 0..m {
        let i = p.ordinates[j];
        if i <= 0.0 {
            dropped += 1;
            continue;
        }
        let s = (p.frequencies[j] / 2.0).sin();
        points.push((-(4.0 * s * s).ln(), i.ln()));
    }
    if points.len() < MIN_FREQUENCIES {
        return Err(LrdError::Input(format!(
            "only {} nonzero ordinates among the first {m}",
            points.len()
        )));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().cloned().unzip();
    let fit = stats::ols(&lx, &ly)?;
    let stderr = (PI * PI / 6.0 / fit.sxx).sqrt();
    Ok(EstimatorResult::from_d(
        fit.slope,
        Method::Gph,
        Bandwidth::Frequencies(m),
        Some(stderr),
        p.n,
        Diagnostics {
            points,
            dropped,
            ..Default::default()
        },
    ))
}

/// Local Whittle objective
/// `R(d) = log(mean_j l_j^{2d} I_j) - 2d mean_j log l_j` over `j <= m`.
pub fn local_whittle_objective(p: &Periodogram, m: usize, d: f64) -> f64 {
    let freqs = &p.frequencies[..m];
    let ords = &p.ordinates[..m];
    let mean_log: f64 = freqs.iter().map(|l| l.ln()).sum::<f64>() / m as f64;
    let s: f64 = freqs
        .iter()
        .zip(ords)
        .map(|(l, i)| l.powf(2.0 * d) * i)
        .sum::<f64>()
        / m as f64;
    s.ln() - 2.0 * d * mean_log
}

pub fn estimate_local_whittle(x: &[f64], m: usize) -> Result<EstimatorResult> {
    let p = periodogram(x)?;
    estimate_local_whittle_from(&p, m)
}

pub fn estimate_local_whittle_from(p: &Periodogram, m: usize) -> Result<EstimatorResult> {
    check_bandwidth(p, m)?;
    if p.ordinates[..m].iter().all(|v| *v <= 0.0) {
        return Err(LrdError::DegenerateInput(
            "all periodogram ordinates are zero".into(),
        ));
    }
    let min = golden_section(
        |d| local_whittle_objective(p, m, d),
        LW_RANGE.0,
        LW_RANGE.1,
        OPT_TOL,
    );
    if !min.value.is_finite() {
        return Err(LrdError::DegenerateInput(
            "local Whittle objective is not finite".into(),
        ));
    }
    Ok(EstimatorResult::from_d(
        min.argmin,
        Method::LocalWhittle,
        Bandwidth::Frequencies(m),
        Some(1.0 / (2.0 * (m as f64).sqrt())),
        p.n,
        Diagnostics {
            objective_trace: min.trace,
            boundary_hit: min.at_boundary,
            ..Default::default()
        },
    ))
}

/// Discrete Whittle objective for FARIMA(0, d, 0):
/// `Q(d) = mean_j I_j / g_d(l_j)`, averaged over all Fourier frequencies
/// in `(0, pi)`.
pub fn whittle_objective(p: &Periodogram, d: f64) -> f64 {
    let model = SpectralModel::new(d, 1.0);
    p.frequencies
        .iter()
        .zip(&p.ordinates)
        .map(|(l, i)| i / model.g(*l))
        .sum::<f64>()
        / p.len() as f64
}

/// Parametric Whittle fit of FARIMA(0, d, 0). `sigma2_hat = 2 pi min Q`;
/// the standard error is `2 sqrt(pi / (N w_d))`.
pub fn whittle_farima(x: &[f64]) -> Result<EstimatorResult> {
    let n = x.len();
    if n < WHITTLE_MIN_LEN {
        return Err(LrdError::Input(format!(
            "Whittle fit needs N >= {WHITTLE_MIN_LEN}, got {n}"
        )));
    }
    let p = periodogram(x)?;
    if p.ordinates.iter().all(|v| *v <= 0.0) {
        return Err(LrdError::DegenerateInput(
            "all periodogram ordinates are zero".into(),
        ));
    }
    let min = golden_section(
        |d| whittle_objective(&p, d),
        WHITTLE_RANGE.0,
        WHITTLE_RANGE.1,
        OPT_TOL,
    );
    let model = SpectralModel::new(min.argmin, 2.0 * PI * min.value);
    let stderr = 2.0 * (PI / (n as f64 * model.curvature())).sqrt();
    Ok(EstimatorResult::from_d(
        min.argmin,
        Method::WhittleFarima,
        Bandwidth::Full(p.len()),
        Some(stderr),
        n,
        Diagnostics {
            objective_trace: min.trace,
            boundary_hit: min.at_boundary,
            sigma2_hat: Some(model.sigma2),
            ..Default::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate_farima, simulate_fgn, FarimaSpec, FgnSpec};

    fn fgn(h: f64, n: usize, seed: u64) -> Vec<f64> {
        simulate_fgn(&FgnSpec::new(h, n), seed).unwrap().values
    }

    fn mean_estimate(h: f64, n: usize, reps: u64, f: impl Fn(&[f64]) -> f64) -> f64 {
        let v: Vec<f64> = (0..reps).map(|s| f(&fgn(h, n, 1000 + s))).collect();
        stats::mean(&v)
    }

    #[test]
    fn method_tags_round_trip() {
        for m in [
            Method::Aggvar,
            Method::Gph,
            Method::LocalWhittle,
            Method::WhittleFarima,
        ] {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("rs".parse::<Method>().is_err());
    }

    #[test]
    fn block_grid_is_increasing() {
        let b = default_blocks(10_000, 15).unwrap();
        assert_eq!(b[0], 10);
        assert_eq!(*b.last().unwrap(), 2500);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(default_blocks(40, 15).is_err());
    }

    #[test]
    fn aggvar_input_errors() {
        let x = fgn(0.7, 1000, 1);
        assert!(estimate_aggvar(&x, &[10, 20]).is_err());
        assert!(estimate_aggvar(&x, &[10, 20, 20]).is_err());
        assert!(estimate_aggvar(&x[..200], &[10, 20, 40]).is_err());
    }

    #[test]
    fn aggvar_on_white_noise_and_fgn() {
        let h = mean_estimate(0.5, 10_000, 10, |x| {
            estimate(x, Method::Aggvar, None).unwrap().h_hat
        });
        assert!((h - 0.5).abs() < 0.05, "{h}");
        let h = mean_estimate(0.8, 10_000, 10, |x| {
            estimate(x, Method::Aggvar, None).unwrap().h_hat
        });
        assert!((h - 0.8).abs() < 0.07, "{h}");
        let h = mean_estimate(0.7, 10_000, 10, |x| {
            let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
            estimate(&sq, Method::Aggvar, None).unwrap().h_hat
        });
        assert!((h - 0.5).abs() < 0.08, "{h}");
    }

    #[test]
    fn gph_examples() {
        let n = 8192;
        let m = default_bandwidth(Method::Gph, n);
        let h = mean_estimate(0.7, n, 10, |x| estimate_gph(x, m).unwrap().h_hat);
        assert!((h - 0.7).abs() < 0.1, "{h}");
        let h = mean_estimate(0.5, n, 10, |x| estimate_gph(x, m).unwrap().h_hat);
        assert!((h - 0.5).abs() < 0.1, "{h}");
        let r = estimate_gph(&fgn(0.7, n, 5), m).unwrap();
        assert!((r.d_hat - (r.h_hat - 0.5)).abs() == 0.0);
        assert!(estimate_gph(&fgn(0.7, n, 5), 4).is_err());
    }

    #[test]
    fn local_whittle_examples() {
        let n = 8192;
        let m = default_bandwidth(Method::LocalWhittle, n);
        let h = mean_estimate(0.7, n, 10, |x| estimate_local_whittle(x, m).unwrap().h_hat);
        assert!((h - 0.7).abs() < 0.05, "{h}");
        let h = mean_estimate(0.5, n, 10, |x| estimate_local_whittle(x, m).unwrap().h_hat);
        assert!((h - 0.5).abs() < 0.05, "{h}");
    }

    #[test]
    fn local_whittle_objective_is_convex_on_white_noise() {
        let x = fgn(0.5, 4096, 3);
        let p = periodogram(&x).unwrap();
        let m = default_bandwidth(Method::LocalWhittle, x.len());
        let grid: Vec<f64> = (0..=148).map(|i| -0.49 + 0.01 * i as f64).collect();
        let v: Vec<f64> = grid
            .iter()
            .map(|d| local_whittle_objective(&p, m, *d))
            .collect();
        for w in v.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] > 0.0);
        }
    }

    #[test]
    fn local_whittle_scale_invariance() {
        let x = fgn(0.75, 4096, 8);
        let y: Vec<f64> = x.iter().map(|v| 7.5 * v).collect();
        let a = estimate(&x, Method::LocalWhittle, None).unwrap();
        let b = estimate(&y, Method::LocalWhittle, None).unwrap();
        assert!((a.d_hat - b.d_hat).abs() < 1e-6);
    }

    #[test]
    fn local_whittle_rejects_zero_input() {
        assert!(matches!(
            estimate_local_whittle(&[1.0; 256], 20),
            Err(LrdError::DegenerateInput(_))
        ));
    }

    #[test]
    fn whittle_farima_recovers_d_and_sigma() {
        let n = 8192;
        let mut ds = Vec::new();
        for s in 0..10 {
            let x = simulate_farima(&FarimaSpec { d: 0.3, n }, 50 + s).unwrap();
            ds.push(whittle_farima(&x.values).unwrap().d_hat);
        }
        assert!((stats::mean(&ds) - 0.3).abs() < 0.05);

        let white = fgn(0.5, n, 77);
        let r = whittle_farima(&white).unwrap();
        assert!(r.d_hat.abs() < 0.03, "{}", r.d_hat);
        let s2 = r.diagnostics.sigma2_hat.unwrap();
        assert!((s2 - 1.0).abs() < 0.05, "{s2}");
        // asymptotic sd of d for FARIMA is sqrt(6 / (pi^2 N))
        let want = (6.0 / (PI * PI * n as f64)).sqrt();
        assert!((r.stderr.unwrap() - want).abs() < 1e-9 * want.max(1.0));
    }

    #[test]
    fn whittle_sigma_equivariance() {
        let x = fgn(0.7, 2048, 12);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let a = whittle_farima(&x).unwrap();
        let b = whittle_farima(&y).unwrap();
        assert!((a.d_hat - b.d_hat).abs() < 1e-6);
        let ratio = b.diagnostics.sigma2_hat.unwrap() / a.diagnostics.sigma2_hat.unwrap();
        assert!((ratio - 9.0).abs() < 1e-3);
        assert!(whittle_farima(&x[..500]).is_err());
    }
}
