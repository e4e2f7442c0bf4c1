//! Generators for the process families used throughout the crate:
//! fractional Gaussian noise and FARIMA(0, d, 0) by circulant embedding,
//! long-memory linear processes by FFT convolution, short-memory recursive
//! models, and transformed (subordinated) series.
//!
//! Every generator is a pure function of its specification, length and
//! seed.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{LrdError, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::series::{SeriesMeta, TimeSeries};
use crate::transform::TransformSpec;

/// Steps discarded before recording recursive short-memory models.
pub const BURN_IN: usize = 1000;
/// Largest length for the dense Cholesky fallback.
pub const CHOLESKY_MAX: usize = 4096;
const EMBEDDING_TOL: f64 = 1e-9;

/// Unit-variance fGn autocovariance
/// `(|n+1|^{2H} - 2|n|^{2H} + |n-1|^{2H}) / 2`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> Result<f64> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(LrdError::Domain(format!(
            "Hurst index {hurst} outside (0, 1)"
        )));
    }
    Ok(fgn_acov_unchecked(hurst, lag))
}

fn fgn_acov_unchecked(hurst: f64, lag: usize) -> f64 {
    let k = lag as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Autocovariances of FARIMA(0, d, 0) with unit innovation variance at lags
/// `0..=max_lag`.
pub fn farima_autocovariance(d: f64, max_lag: usize) -> Result<Vec<f64>> {
    if !(d > -0.5 && d < 0.5) {
        return Err(LrdError::Domain(format!(
            "memory parameter {d} outside (-1/2, 1/2)"
        )));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    let g0 = (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
    out.push(g0);
    for k in 0..max_lag {
        let kf = k as f64;
        let next = out[k] * (kf + d) / (kf + 1.0 - d);
        out.push(next);
    }
    Ok(out)
}

enum Synthesis {
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        lower: Vec<f64>,
    },
}

/// Exact sampler for a stationary Gaussian sequence with a given
/// autocovariance, built once and reused across seeds.
pub struct GaussianSampler {
    n: usize,
    scale: f64,
    synthesis: Synthesis,
}

impl std::fmt::Debug for GaussianSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaussianSampler")
            .field("n", &self.n)
            .field("scale", &self.scale)
            .finish()
    }
}

impl GaussianSampler {
    /// Circulant embedding on a circle of size `2(n-1)`. Embedding
    /// eigenvalues below `-1e-9 * max` fall back to a dense Cholesky factor
    /// when `n <= 4096`, and fail otherwise.
    pub fn new(acov: &[f64], scale: f64) -> Result<Self> {
        let n = acov.len();
        if n < 2 {
            return Err(LrdError::Input("paths need at least 2 points".into()));
        }
        let m = 2 * (n - 1);
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k < n { k } else { m - k };
                Complex64::new(acov[lag], 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
        let max = eig.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.iter().cloned().fold(f64::MAX, f64::min);
        if min < -EMBEDDING_TOL * max {
            if n <= CHOLESKY_MAX {
                return Ok(GaussianSampler {
                    n,
                    scale,
                    synthesis: Synthesis::Cholesky {
                        lower: cholesky_toeplitz(acov)?,
                    },
                });
            }
            return Err(LrdError::Embedding(format!(
                "negative eigenvalue {min:e} (max {max:e}) for length {n}"
            )));
        }
        let sqrt_eig = eig
            .iter()
            .map(|&l| (l.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(GaussianSampler {
            n,
            scale,
            synthesis: Synthesis::Circulant { sqrt_eig, fft },
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn uses_cholesky(&self) -> bool {
        matches!(self.synthesis, Synthesis::Cholesky { .. })
    }

    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        match &self.synthesis {
            Synthesis::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|&a| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(a * re, a * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..self.n].iter().map(|c| self.scale * c.re).collect()
            }
            Synthesis::Cholesky { lower } => {
                let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
                (0..self.n)
                    .map(|i| {
                        let row = &lower[i * self.n..i * self.n + i + 1];
                        self.scale * row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
                    })
                    .collect()
            }
        }
    }
}

fn cholesky_toeplitz(acov: &[f64]) -> Result<Vec<f64>> {
    let n = acov.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = acov[i - j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(LrdError::Embedding(
                        "covariance matrix is not positive definite".into(),
                    ));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnSpec {
    pub hurst: f64,
    pub n: usize,
    pub sigma: f64,
}

impl FgnSpec {
    pub fn new(hurst: f64, n: usize) -> Self {
        FgnSpec {
            hurst,
            n,
            sigma: 1.0,
        }
    }

    pub fn sampler(&self) -> Result<GaussianSampler> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(LrdError::Domain(format!(
                "Hurst index {} outside (0, 1)",
                self.hurst
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(LrdError::Domain("sigma must be positive".into()));
        }
        let acov: Vec<f64> = (0..self.n)
            .map(|k| fgn_acov_unchecked(self.hurst, k))
            .collect();
        GaussianSampler::new(&acov, self.sigma)
    }

    pub fn describe(&self) -> String {
        format!("fgn(H={},sigma={})", self.hurst, self.sigma)
    }
}

/// Fractional Gaussian noise path.
pub fn simulate_fgn(spec: &FgnSpec, seed: u64) -> Result<TimeSeries> {
    let values = spec.sampler()?.sample(seed);
    TimeSeries::new(
        values,
        SeriesMeta {
            generator: spec.describe(),
            seed: Some(seed),
            ..Default::default()
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarimaSpec {
    pub d: f64,
    pub n: usize,
}

impl FarimaSpec {
    pub fn sampler(&self) -> Result<GaussianSampler> {
        let acov = farima_autocovariance(self.d, self.n.saturating_sub(1))?;
        GaussianSampler::new(&acov, 1.0)
    }

    pub fn describe(&self) -> String {
        format!("farima(d={})", self.d)
    }
}

/// Gaussian FARIMA(0, d, 0) path with unit innovation variance.
pub fn simulate_farima(spec: &FarimaSpec, seed: u64) -> Result<TimeSeries> {
    let values = spec.sampler()?.sample(seed);
    TimeSeries::new(
        values,
        SeriesMeta {
            generator: spec.describe(),
            seed: Some(seed),
            ..Default::default()
        },
    )
}

/// Zero-mean, unit-variance innovation laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum Innovation {
    Gaussian,
    /// `Exp(1) - 1`.
    CenteredExponential,
    /// Student t rescaled to unit variance; requires `df > 4`.
    StudentT {
        df: f64,
    },
}

impl Innovation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Innovation::StudentT { df } if !(*df > 4.0) => Err(LrdError::Domain(format!(
                "student-t needs df > 4, got {df}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn draw(&self, rng: &mut Rng) -> f64 {
        match self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::CenteredExponential => {
                let e: f64 = rng.sample(Exp1);
                e - 1.0
            }
            Innovation::StudentT { df } => {
                let t = StudentT::new(*df).expect("validated df");
                t.sample(rng) * ((df - 2.0) / df).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub hurst: f64,
    pub innovation: Innovation,
    /// Number of lags `L`; `None` selects `max(10^4, 10 N)`.
    pub truncation: Option<usize>,
}

impl LinearSpec {
    pub fn truncation_for(&self, n: usize) -> usize {
        self.truncation.unwrap_or_else(|| (10 * n).max(10_000))
    }

    /// Coefficients `(k+1)^{H - 3/2}`, `k = 0..=L`, scaled to unit sum of
    /// squares.
    pub fn coefficients(&self, truncation: usize) -> Vec<f64> {
        let e = self.hurst - 1.5;
        let raw: Vec<f64> = (0..=truncation).map(|k| ((k + 1) as f64).powf(e)).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        raw.into_iter().map(|a| a / norm).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(LrdError::Domain(format!(
                "linear process needs H in (1/2, 1), got {}",
                self.hurst
            )));
        }
        self.innovation.validate()
    }
}

/// Long-memory linear process `Y(t) = sum_k a_k e(t - k)` with unit
/// marginal variance.
///
/// Innovations are drawn backwards in time from the most recent one, so two
/// runs with the same seed and different truncations share their recent
/// innovations.
pub fn simulate_linear(spec: &LinearSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    spec.validate()?;
    if n < 2 {
        return Err(LrdError::Input("paths need at least 2 points".into()));
    }
    let lags = spec.truncation_for(n);
    if lags < 100 {
        return Err(LrdError::Input(
            "linear truncation must be at least 100".into(),
        ));
    }
    let coef = spec.coefficients(lags);
    let total = n + lags;
    let mut rng = rng_from_seed(seed);
    let mut eps = vec![0.0; total];
    for k in 0..total {
        eps[total - 1 - k] = spec.innovation.draw(&mut rng);
    }
    let full = fft_convolve(&eps, &coef);
    let values = full[lags..lags + n].to_vec();
    TimeSeries::new(
        values,
        SeriesMeta {
            generator: format!(
                "linear(H={},innovation={:?},L={lags})",
                spec.hurst, spec.innovation
            ),
            seed: Some(seed),
            ..Default::default()
        },
    )
}

/// Full linear convolution.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |x: &[f64]| -> Vec<Complex64> {
        (0..size)
            .map(|i| Complex64::new(x.get(i).copied().unwrap_or(0.0), 0.0))
            .collect()
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa[..out_len].iter().map(|c| c.re / size as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum WeakKind {
    Iid,
    /// `Y(n) = phi Y(n-1) + e(n)`.
    Ar1 {
        phi: f64,
    },
    /// `Y(n) = phi tanh(Y(n-1)) + e(n)`, a nonlinear contraction.
    TanhAr {
        phi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakDepSpec {
    pub kind: WeakKind,
    pub innovation: Innovation,
}

impl WeakDepSpec {
    pub fn iid() -> Self {
        WeakDepSpec {
            kind: WeakKind::Iid,
            innovation: Innovation::Gaussian,
        }
    }

    pub fn ar1(phi: f64) -> Self {
        WeakDepSpec {
            kind: WeakKind::Ar1 { phi },
            innovation: Innovation::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            WeakKind::Ar1 { phi } | WeakKind::TanhAr { phi } if !(phi.abs() < 1.0) => Err(
                LrdError::Domain(format!("contraction needs |phi| < 1, got {phi}")),
            ),
            _ => self.innovation.validate(),
        }
    }

    fn step(&self, prev: f64, eps: f64) -> f64 {
        match self.kind {
            WeakKind::Iid => eps,
            WeakKind::Ar1 { phi } => phi * prev + eps,
            WeakKind::TanhAr { phi } => phi * prev.tanh() + eps,
        }
    }

    pub fn describe(&self) -> String {
        format!("{:?}/{:?}", self.kind, self.innovation)
    }
}

/// Stationary short-memory path, recorded after a burn-in of
/// [`BURN_IN`] steps.
pub fn simulate_weak(spec: &WeakDepSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    spec.validate()?;
    if n < 2 {
        return Err(LrdError::Input("paths need at least 2 points".into()));
    }
    let mut rng = rng_from_seed(seed);
    let burn = if matches!(spec.kind, WeakKind::Iid) {
        0
    } else {
        BURN_IN
    };
    let mut y = 0.0;
    let mut values = Vec::with_capacity(n);
    for t in 0..burn + n {
        y = spec.step(y, spec.innovation.draw(&mut rng));
        if t >= burn {
            values.push(y);
        }
    }
    TimeSeries::new(
        values,
        SeriesMeta {
            generator: spec.describe(),
            seed: Some(seed),
            ..Default::default()
        },
    )
}

/// Coupled L2 distance `|| Y(n) - Y*(n) ||` where `Y*` shares every
/// innovation with `Y` except a redrawn `e(0)`. Estimated as a
/// root-mean-square over `reps` coupled pairs.
pub fn estimate_physical_dependence(
    spec: &WeakDepSpec,
    lag: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    spec.validate()?;
    if matches!(spec.kind, WeakKind::Iid) && lag >= 1 {
        return Ok(0.0);
    }
    if reps < 1000 {
        return Err(LrdError::Input(
            "physical dependence needs at least 1000 pairs".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut sum_sq = 0.0;
    for _ in 0..reps {
        let mut y = 0.0;
        for _ in 0..BURN_IN {
            y = spec.step(y, spec.innovation.draw(&mut rng));
        }
        let e0 = spec.innovation.draw(&mut rng);
        let e0_star = spec.innovation.draw(&mut rng);
        let mut a = spec.step(y, e0);
        let mut b = spec.step(y, e0_star);
        for _ in 0..lag {
            let e = spec.innovation.draw(&mut rng);
            a = spec.step(a, e);
            b = spec.step(b, e);
        }
        sum_sq += (a - b).powi(2);
    }
    Ok((sum_sq / reps as f64).sqrt())
}

/// Applies `G` pointwise, or over sliding windows for lagged transforms
/// (output length `N - l`).
pub fn apply_transform(x: &TimeSeries, g: &TransformSpec) -> Result<TimeSeries> {
    g.validate()?;
    let lags = g.lags();
    if x.len() <= lags {
        return Err(LrdError::Input(format!(
            "window of {} lags does not fit a series of length {}",
            lags + 1,
            x.len()
        )));
    }
    let values: Vec<f64> = if lags == 0 {
        x.values.iter().map(|&v| g.eval(v)).collect()
    } else {
        let mut window = vec![0.0; lags + 1];
        (lags..x.len())
            .map(|t| {
                for (j, w) in window.iter_mut().enumerate() {
                    *w = x.values[t - j];
                }
                g.eval_window(&window)
            })
            .collect()
    };
    let mut meta = x.meta.clone();
    meta.generator = format!("{} |> {}", x.meta.generator, g);
    TimeSeries::new(values, meta)
}

/// `N^{-exponent} * sum_{n <= floor(N t)} (x(n) - mean)` at each grid point.
pub fn partial_sum_scaled(x: &[f64], exponent: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(LrdError::Input("partial-sum grid is empty".into()));
    }
    if !(exponent > 0.0 && exponent < 1.5) {
        return Err(LrdError::Domain(format!(
            "exponent {exponent} outside (0, 1.5)"
        )));
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(LrdError::Input("grid points must lie in [0, 1]".into()));
    }
    if x.is_empty() {
        return Err(LrdError::Input("empty series".into()));
    }
    let n = x.len();
    let m = crate::stats::mean(x);
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut s = 0.0;
    for v in x {
        s += v - m;
        cumulative.push(s);
    }
    let norm = (n as f64).powf(-exponent);
    Ok(grid
        .iter()
        .map(|t| {
            let k = ((n as f64 * t).floor() as usize).min(n);
            norm * cumulative[k]
        })
        .collect())
}

/// A process description that can be prepared once and sampled for many
/// seeds at a fixed length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum ProcessSpec {
    Fgn { hurst: f64 },
    Farima { d: f64 },
    Linear(LinearSpec),
    Weak(WeakDepSpec),
}

impl ProcessSpec {
    pub fn prepare(&self, n: usize) -> Result<PreparedProcess> {
        Ok(match self {
            ProcessSpec::Fgn { hurst } => {
                PreparedProcess::Gaussian(FgnSpec::new(*hurst, n).sampler()?)
            }
            ProcessSpec::Farima { d } => {
                PreparedProcess::Gaussian(FarimaSpec { d: *d, n }.sampler()?)
            }
            ProcessSpec::Linear(spec) => {
                spec.validate()?;
                PreparedProcess::Linear(*spec, n)
            }
            ProcessSpec::Weak(spec) => {
                spec.validate()?;
                PreparedProcess::Weak(*spec, n)
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ProcessSpec::Fgn { hurst } => format!("fgn(H={hurst})"),
            ProcessSpec::Farima { d } => format!("farima(d={d})"),
            ProcessSpec::Linear(s) => format!("linear(H={},{:?})", s.hurst, s.innovation),
            ProcessSpec::Weak(s) => s.describe(),
        }
    }
}

pub enum PreparedProcess {
    Gaussian(GaussianSampler),
    Linear(LinearSpec, usize),
    Weak(WeakDepSpec, usize),
}

impl PreparedProcess {
    pub fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        match self {
            PreparedProcess::Gaussian(s) => Ok(s.sample(seed)),
            PreparedProcess::Linear(spec, n) => Ok(simulate_linear(spec, *n, seed)?.values),
            PreparedProcess::Weak(spec, n) => Ok(simulate_weak(spec, *n, seed)?.values),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_relative_eq;

    #[test]
    fn fgn_autocovariance_examples() {
        assert_eq!(fgn_autocovariance(0.3, 0).unwrap(), 1.0);
        assert_eq!(fgn_autocovariance(0.5, 1).unwrap(), 0.0);
        assert_relative_eq!(
            fgn_autocovariance(0.75, 1).unwrap(),
            2f64.sqrt() - 1.0,
            epsilon = 1e-15
        );
        assert!(fgn_autocovariance(1.0, 1).is_err());
    }

    #[test]
    fn farima_autocovariance_matches_gamma_ratio() {
        // gamma(k) = Gamma(1-2d) Gamma(k+d) / (Gamma(d) Gamma(1-d) Gamma(k+1-d))
        let d = 0.3;
        let acov = farima_autocovariance(d, 20).unwrap();
        for (k, g) in acov.iter().enumerate() {
            let kf = k as f64;
            let direct = (ln_gamma(1.0 - 2.0 * d) + ln_gamma(kf + d)
                - ln_gamma(d)
                - ln_gamma(1.0 - d)
                - ln_gamma(kf + 1.0 - d))
            .exp();
            assert_relative_eq!(*g, direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn fgn_is_deterministic_per_seed() {
        let spec = FgnSpec::new(0.8, 1000);
        let a = simulate_fgn(&spec, 42).unwrap();
        let b = simulate_fgn(&spec, 42).unwrap();
        let c = simulate_fgn(&spec, 43).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn fgn_lag_one_correlation() {
        let n = 4096;
        let white = simulate_fgn(&FgnSpec::new(0.5, n), 1).unwrap();
        let acov = stats::autocovariance(&white.values, 1);
        assert!((acov[1] / acov[0]).abs() < 3.0 / (n as f64).sqrt());
        let target = 2f64.powf(1.6) / 2.0 - 1.0;
        let mut r1 = Vec::new();
        for s in 0..20 {
            let x = simulate_fgn(&FgnSpec::new(0.8, n), 100 + s).unwrap();
            let a = stats::autocovariance(&x.values, 1);
            r1.push(a[1] / a[0]);
        }
        assert!(
            (stats::mean(&r1) - target).abs() < 0.05,
            "{}",
            stats::mean(&r1)
        );
    }

    #[test]
    fn cholesky_fallback_reproduces_covariance_structure() {
        // A covariance whose circulant embedding is indefinite but which is
        // itself positive definite.
        let acov = vec![1.0, 0.9, 0.65, 0.3];
        let s = GaussianSampler::new(&acov, 1.0).unwrap();
        assert!(s.uses_cholesky());
        let mut c01 = 0.0;
        let mut c03 = 0.0;
        let reps = 20_000;
        for seed in 0..reps {
            let x = s.sample(seed);
            c01 += x[0] * x[1];
            c03 += x[0] * x[3];
        }
        assert!((c01 / reps as f64 - 0.9).abs() < 0.03);
        assert!((c03 / reps as f64 - 0.3).abs() < 0.03);
    }

    #[test]
    fn weak_models() {
        let n = 4096;
        let iid = simulate_weak(&WeakDepSpec::iid(), n, 3).unwrap();
        let a = stats::autocovariance(&iid.values, 1);
        assert!((a[1] / a[0]).abs() < 3.0 / (n as f64).sqrt());
        let ar = simulate_weak(&WeakDepSpec::ar1(0.5), n, 4).unwrap();
        let a = stats::autocovariance(&ar.values, 1);
        assert!((a[1] / a[0] - 0.5).abs() < 0.05);
        assert!(simulate_weak(&WeakDepSpec::ar1(1.0), n, 4).is_err());
    }

    #[test]
    fn physical_dependence_examples() {
        assert_eq!(
            estimate_physical_dependence(&WeakDepSpec::iid(), 1, 1000, 0).unwrap(),
            0.0
        );
        let ar = WeakDepSpec::ar1(0.5);
        let d2 = estimate_physical_dependence(&ar, 2, 2000, 5).unwrap();
        let d3 = estimate_physical_dependence(&ar, 3, 2000, 5).unwrap();
        let d10 = estimate_physical_dependence(&ar, 10, 2000, 5).unwrap();
        assert!((d3 / d2 - 0.5).abs() < 0.05);
        assert!(d10 < d2);
        // coupling oracle: phi^n * sqrt(2)
        assert!((d2 - 0.25 * 2f64.sqrt()).abs() < 0.03);
    }

    #[test]
    fn transforms_and_windows() {
        let x = TimeSeries::from_values(vec![1.0, 3.0, 6.0, 10.0]).unwrap();
        assert_eq!(
            apply_transform(&x, &TransformSpec::Identity)
                .unwrap()
                .values,
            x.values
        );
        assert_eq!(
            apply_transform(&x, &TransformSpec::Square).unwrap().values,
            vec![1.0, 9.0, 36.0, 100.0]
        );
        let diff = apply_transform(&x, &TransformSpec::LaggedLinear(vec![1.0, -1.0])).unwrap();
        assert_eq!(diff.values, vec![2.0, 3.0, 4.0]);
        let long = TransformSpec::LaggedLinear(vec![1.0; 5]);
        assert!(apply_transform(&x, &long).is_err());
    }

    #[test]
    fn partial_sums() {
        let x = vec![2.0; 10];
        assert!(partial_sum_scaled(&x, 0.8, &[0.0, 0.5, 1.0])
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let p = partial_sum_scaled(&y, 0.5, &[0.0, 1.0]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!(p[1].abs() < 1e-12);
        assert!(partial_sum_scaled(&y, 0.5, &[]).is_err());
    }

    #[test]
    fn linear_process_truncation_stability() {
        let mk = |l| LinearSpec {
            hurst: 0.7,
            innovation: Innovation::Gaussian,
            truncation: Some(l),
        };
        let a = simulate_linear(&mk(1000), 4096, 9).unwrap();
        let b = simulate_linear(&mk(10_000), 4096, 9).unwrap();
        let r = |v: &[f64]| {
            let c = stats::autocovariance(v, 1);
            c[1] / c[0]
        };
        assert!((r(&a.values) - r(&b.values)).abs() < 0.01);
    }

    #[test]
    fn exponential_innovations_skew_the_marginal() {
        let spec = LinearSpec {
            hurst: 0.7,
            innovation: Innovation::CenteredExponential,
            truncation: Some(2000),
        };
        let x = simulate_linear(&spec, 8192, 11).unwrap();
        let skew = stats::skewness(&x.values);
        // SE of sample skewness under dependence is inflated; 3 * sqrt(6/N)
        // is the iid reference.
        assert!(skew > 3.0 * (6.0 / 8192f64).sqrt(), "{skew}");
    }
}
