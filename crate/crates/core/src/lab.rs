//! Monte Carlo experiments that measure convergence rates and limit shapes:
//! partial-sum scaling, the sample-variance dichotomy, empirical-process
//! degeneracy, the Whittle rate collapse and CLT stability under weak
//! dependence.
//!
//! Rates are read off as the OLS slope of `log RMS(statistic)` on `log N`.
//! Every replicate draws from its own derived seed, so reports are
//! identical across runs and thread counts.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LrdError, Result};
use crate::estimators::whittle_farima;
use crate::hermite::{factorial, hermite_expand, hermite_rank, HermiteExpansion, Rank};
use crate::optimize::golden_section;
use crate::process::{
    estimate_physical_dependence, farima_autocovariance, FgnSpec, ProcessSpec, WeakDepSpec,
};
use crate::rng::{derive_named, derive_seed, rng_from_seed};
use crate::series::format_f64;
use crate::stats::{self, KsTest};
use crate::transform::TransformSpec;
use crate::whittle::{
    a_coefficients_exact, compute_rho1_report, symmetric, Rho1Report, SpectralModel,
};

pub const MIN_REPLICATES: usize = 200;
pub const MIN_GRID_POINTS: usize = 4;
/// Share of non-finite replicates tolerated per grid point.
pub const MAX_EXCLUDED_SHARE: f64 = 0.05;
const QUAD_ORDER: usize = 128;
const EXPANSION_ORDER: usize = 10;
const CALIBRATION_LEN: usize = 1 << 20;
/// Lags used for the population Whittle objective and `rho_1`.
const PSEUDO_TRUE_LAGS: usize = 20_000;
const RHO1_LAGS: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<usize>,
    pub log_stat: Vec<f64>,
    pub fitted_exponent: f64,
    pub exponent_ci: (f64, f64),
    pub replicates: usize,
    pub target: String,
    /// Exponent predicted by the limit theory, when there is one.
    pub expected_exponent: Option<f64>,
    pub excluded: usize,
}

impl ScalingReport {
    /// `N,log_stat` rows for plotting.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("N,log_stat\n");
        for (n, v) in self.n_grid.iter().zip(&self.log_stat) {
            out.push_str(&format!("{n},{}\n", format_f64(*v)));
        }
        out
    }
}

/// Fits `log_stat = a + p log N` and a 95% interval for `p` from the
/// regression residuals.
pub fn fit_exponent(n_grid: &[usize], log_stat: &[f64]) -> Result<(f64, (f64, f64))> {
    if n_grid.len() != log_stat.len() || n_grid.len() < 3 {
        return Err(LrdError::Input(
            "need at least 3 matching grid points".into(),
        ));
    }
    let lx: Vec<f64> = n_grid.iter().map(|n| (*n as f64).ln()).collect();
    let fit = stats::ols(&lx, log_stat)?;
    let df = (n_grid.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| LrdError::Numeric(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * fit.slope_se;
    Ok((fit.slope, (fit.slope - half, fit.slope + half)))
}

fn check_grid(n_grid: &[usize], replicates: usize) -> Result<()> {
    if n_grid.len() < MIN_GRID_POINTS {
        return Err(LrdError::Input(format!(
            "N grid needs at least {MIN_GRID_POINTS} points"
        )));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LrdError::Input("N grid must be strictly increasing".into()));
    }
    if (n_grid[n_grid.len() - 1] as f64) < 10.0 * n_grid[0] as f64 {
        return Err(LrdError::Input(
            "N grid must span at least one decade".into(),
        ));
    }
    if replicates < MIN_REPLICATES {
        return Err(LrdError::Input(format!(
            "need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    Ok(())
}

/// `count` powers of two from `lo` to `hi` inclusive.
pub fn dyadic_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        out.push(n);
        n *= 2;
    }
    out
}

/// Runs `eval(prepared, seed)` for every replicate at every grid point and
/// returns the finite values per grid point.
fn monte_carlo<P: Sync>(
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
    prepare: impl Fn(usize) -> Result<P>,
    eval: impl Fn(&P, u64) -> Result<f64> + Sync,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut out = Vec::with_capacity(n_grid.len());
    let mut excluded = 0;
    for &n in n_grid {
        let prepared = prepare(n)?;
        let level_seed = derive_seed(seed, n as u64);
        let values: Vec<Result<f64>> = (0..replicates)
            .into_par_iter()
            .map(|r| eval(&prepared, derive_seed(level_seed, r as u64)))
            .collect();
        let mut kept = Vec::with_capacity(replicates);
        let mut bad = 0;
        for v in values {
            match v {
                Ok(x) if x.is_finite() => kept.push(x),
                Ok(_) => bad += 1,
                Err(e @ LrdError::Input(_)) | Err(e @ LrdError::Domain(_)) => return Err(e),
                Err(_) => bad += 1,
            }
        }
        if bad as f64 > MAX_EXCLUDED_SHARE * replicates as f64 {
            return Err(LrdError::Numeric(format!(
                "{bad} of {replicates} replicates failed at N = {n}"
            )));
        }
        excluded += bad;
        out.push(kept);
    }
    Ok((out, excluded))
}

fn root_mean_square(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn report_from(
    n_grid: &[usize],
    samples: &[Vec<f64>],
    replicates: usize,
    excluded: usize,
    target: String,
    expected_exponent: Option<f64>,
) -> Result<ScalingReport> {
    let log_stat: Vec<f64> = samples.iter().map(|s| root_mean_square(s).ln()).collect();
    if log_stat.iter().any(|v| !v.is_finite()) {
        return Err(LrdError::Numeric("RMS of the statistic vanished".into()));
    }
    let (fitted_exponent, exponent_ci) = fit_exponent(n_grid, &log_stat)?;
    Ok(ScalingReport {
        n_grid: n_grid.to_vec(),
        log_stat,
        fitted_exponent,
        exponent_ci,
        replicates,
        target,
        expected_exponent,
        excluded,
    })
}

/// Statistic whose RMS growth `scaling_exponent` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// `sum_n x(n)`.
    Sum,
    /// `(1/N) sum_n x(n)`.
    Mean,
}

impl Statistic {
    fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum();
        match self {
            Statistic::Sum => s,
            Statistic::Mean => s / x.len() as f64,
        }
    }
}

/// Applies `g` pointwise, or over sliding windows when it has lags.
pub fn transform_path(x: Vec<f64>, g: Option<&TransformSpec>) -> Vec<f64> {
    match g {
        None | Some(TransformSpec::Identity) => x,
        Some(g) if g.is_instantaneous() => x.into_iter().map(|v| g.eval(v)).collect(),
        Some(g) => {
            let l = g.lags();
            (l..x.len())
                .map(|t| {
                    let window: Vec<f64> = (0..=l).map(|j| x[t - j]).collect();
                    g.eval_window(&window)
                })
                .collect()
        }
    }
}

fn marginal_sd(process: &ProcessSpec) -> Result<Option<f64>> {
    Ok(match process {
        ProcessSpec::Fgn { .. } => Some(1.0),
        ProcessSpec::Farima { d } => Some(farima_autocovariance(*d, 0)?[0].sqrt()),
        _ => None,
    })
}

/// `E G(X(0))`: Gaussian quadrature for Gaussian processes, otherwise the
/// mean of one long calibration path.
pub fn population_mean(process: &ProcessSpec, g: Option<&TransformSpec>, seed: u64) -> Result<f64> {
    let g = match g {
        None => return Ok(0.0),
        Some(g) => g,
    };
    if let TransformSpec::LaggedLinear(_) = g {
        if !matches!(process, ProcessSpec::Weak(_)) {
            return Ok(0.0);
        }
    }
    if let (Some(sd), true) = (marginal_sd(process)?, g.is_instantaneous()) {
        let scaled = TransformSpec::scaled(g.clone(), sd)?;
        return Ok(hermite_expand(&scaled, 2, QUAD_ORDER)?.mean());
    }
    let path = process
        .prepare(CALIBRATION_LEN)?
        .sample(derive_named(seed, "calibration"))?;
    Ok(stats::mean(&transform_path(path, Some(g))))
}

/// RMS growth of `statistic` over paths `G(X)` (optionally centered by the
/// population mean of `G(X)`).
pub fn scaling_exponent(
    process: &ProcessSpec,
    transform: Option<&TransformSpec>,
    center: bool,
    statistic: Statistic,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<ScalingReport> {
    check_grid(n_grid, replicates)?;
    if let Some(g) = transform {
        g.validate()?;
    }
    let mu = if center {
        population_mean(process, transform, seed)?
    } else {
        0.0
    };
    let (samples, excluded) = monte_carlo(
        n_grid,
        replicates,
        seed,
        |n| process.prepare(n + transform.map_or(0, |g| g.lags())),
        |p, s| {
            let x = transform_path(p.sample(s)?, transform);
            let xc: Vec<f64> = x.iter().map(|v| v - mu).collect();
            Ok(statistic.eval(&xc))
        },
    )?;
    let expected = expected_sum_exponent(process, transform, center)
        .ok()
        .flatten();
    let expected = expected.map(|e| match statistic {
        Statistic::Sum => e,
        Statistic::Mean => e - 1.0,
    });
    let target = format!(
        "{statistic:?} of {}{}{}",
        transform.map_or("".into(), |g| format!("{g} of ")),
        process.describe(),
        if center { ", centered" } else { "" }
    );
    report_from(n_grid, &samples, replicates, excluded, target, expected)
}

/// `H_G` for centered instantaneous transforms of fGn and FARIMA.
fn expected_sum_exponent(
    process: &ProcessSpec,
    transform: Option<&TransformSpec>,
    center: bool,
) -> Result<Option<f64>> {
    let h = match process {
        ProcessSpec::Fgn { hurst } => *hurst,
        ProcessSpec::Farima { d } => d + 0.5,
        ProcessSpec::Weak(_) => return Ok(Some(0.5)),
        ProcessSpec::Linear(_) => return Ok(None),
    };
    let k = match transform {
        None | Some(TransformSpec::Identity) => 1,
        Some(g) if g.is_instantaneous() => {
            if !center && g.polynomial_degree() != Some(1) {
                return Ok(None);
            }
            match hermite_rank(g, crate::hermite::DEFAULT_QUAD_TOL, EXPANSION_ORDER)?.rank {
                Rank::Order(k) => k,
                Rank::NoneUpTo(_) => return Ok(None),
            }
        }
        Some(_) => return Ok(None),
    };
    if h <= 0.5 {
        return Ok(Some(h.max(0.5)));
    }
    Ok(Some(((h - 1.0) * k as f64 + 1.0).max(0.5)))
}

/// Rank of `(F(Z) - E F(Z))^2` for standard Gaussian `Z`.
fn centered_square_rank(f: &TransformSpec) -> Result<Option<usize>> {
    let mu = hermite_expand(f, 2, QUAD_ORDER)?.mean();
    let sq = TransformSpec::composed(
        TransformSpec::Polynomial(vec![mu * mu, -2.0 * mu, 1.0]),
        f.clone(),
    );
    Ok(
        hermite_rank(&sq, crate::hermite::DEFAULT_QUAD_TOL, EXPANSION_ORDER)?
            .rank
            .order(),
    )
}

/// Fluctuation of the sample variance `sigma_hat^2_N - sigma^2` on
/// `X = F(Y)`, `Y` unit fGn. `sigma^2 = Var F(Y)` is computed by quadrature.
pub fn sample_variance_experiment(
    hurst: f64,
    perturbation: Option<&TransformSpec>,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<ScalingReport> {
    check_grid(n_grid, replicates)?;
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(LrdError::Domain(format!("H = {hurst} outside (1/2, 1)")));
    }
    let f = perturbation.cloned().unwrap_or(TransformSpec::Identity);
    if !f.is_instantaneous() {
        return Err(LrdError::Input("perturbation must be instantaneous".into()));
    }
    let expansion = hermite_expand(&f, EXPANSION_ORDER, QUAD_ORDER)?;
    let sigma2 = expansion.l2_norm_sq;
    let u_rank = centered_square_rank(&f)?;
    if u_rank == Some(2) && (hurst - 0.75).abs() < 0.05 {
        return Err(LrdError::Domain(format!(
            "H = {hurst} is within 0.05 of the boundary 3/4"
        )));
    }
    let f_rank = hermite_rank(&f, crate::hermite::DEFAULT_QUAD_TOL, EXPANSION_ORDER)?
        .rank
        .order();
    let expected = match (u_rank, f_rank) {
        (Some(k), Some(r)) => {
            let u = (k as f64 * (hurst - 1.0)).max(-0.5);
            let v = 2.0 * (r as f64 * (hurst - 1.0)).max(-0.5);
            Some(u.max(v))
        }
        _ => None,
    };
    let (samples, excluded) = monte_carlo(
        n_grid,
        replicates,
        seed,
        |n| FgnSpec::new(hurst, n).sampler(),
        |s, seed| {
            let x = transform_path(s.sample(seed), Some(&f));
            Ok(stats::variance_pop(&x) - sigma2)
        },
    )?;
    report_from(
        n_grid,
        &samples,
        replicates,
        excluded,
        format!("sample variance of {f} of fgn(H={hurst})"),
        expected,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalProcessReport {
    pub x_grid: Vec<f64>,
    /// Monte Carlo `J_1(x) = E[1{G(Y) <= x} Y]` from an iid calibration sample.
    #[serde(rename = "J1_estimates")]
    pub j1_estimates: Vec<f64>,
    /// The same by quadrature.
    #[serde(rename = "J1_exact")]
    pub j1_exact: Vec<f64>,
    /// `F(x)` by quadrature.
    pub marginal_cdf: Vec<f64>,
    /// `Corr[F_N(x_i), F_N(x_j)]` across replicates.
    pub cross_correlations: Vec<Vec<f64>>,
    /// Brownian-bridge correlations, the iid reference.
    pub bridge_correlations: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: usize,
    pub replicates: usize,
    pub iid: bool,
    pub x0: f64,
    /// RMS growth of `F_N(x0)` over `N/16..=N`.
    pub scaling: ScalingReport,
}

const J1_CALIBRATION: usize = 1 << 21;

/// `F_N(x) = (1/N) sum_n [1{X(n) <= x} - F(x)]` on `X = G(fGn(H))`, or on
/// `G` of iid Gaussians when `iid` is set.
#[allow(clippy::too_many_arguments)]
pub fn empirical_process_experiment(
    hurst: f64,
    g: &TransformSpec,
    x_grid: &[f64],
    x0: f64,
    n: usize,
    replicates: usize,
    iid: bool,
    seed: u64,
) -> Result<EmpiricalProcessReport> {
    if n < 2048 {
        return Err(LrdError::Input(
            "empirical-process runs need N >= 2048".into(),
        ));
    }
    if replicates < 500 {
        return Err(LrdError::Input(
            "empirical-process runs need >= 500 replicates".into(),
        ));
    }
    if !g.is_instantaneous() {
        return Err(LrdError::Input(format!("{g} is not instantaneous")));
    }
    if x_grid.len() < 2 {
        return Err(LrdError::Input("x grid needs at least two points".into()));
    }
    g.validate()?;
    let indicator = |x: f64| TransformSpec::composed(TransformSpec::IndicatorBelow(x), g.clone());
    let mut marginal_cdf = Vec::with_capacity(x_grid.len());
    let mut j1_exact = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let (c0, c1) = indicator_coefficients(&indicator(x))?;
        marginal_cdf.push(c0);
        j1_exact.push(c1);
    }
    let j1_estimates = j1_monte_carlo(g, x_grid, derive_named(seed, "j1"));
    let process = ProcessSpec::Fgn {
        hurst: if iid { 0.5 } else { hurst },
    };

    // F_N on the grid for every replicate at the main N.
    let sampler = process.prepare(n)?;
    let base = derive_named(seed, "ecdf");
    let rows: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let x = transform_path(sampler.sample(derive_seed(base, r as u64))?, Some(g));
            Ok(ecdf_deviation(&x, x_grid, &marginal_cdf))
        })
        .collect::<Result<_>>()?;
    let k = x_grid.len();
    let mut cross_correlations = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            cross_correlations[i][j] = if i == j {
                1.0
            } else {
                let a: Vec<f64> = rows.iter().map(|r| r[i]).collect();
                let b: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                correlation(&a, &b)
            };
        }
    }
    let bridge_correlations = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| bridge_correlation(marginal_cdf[i], marginal_cdf[j]))
                .collect()
        })
        .collect();

    let grid: Vec<usize> = (0..5).map(|i| n >> (4 - i)).collect();
    let f0 = indicator_coefficients(&indicator(x0))?.0;
    let (samples, excluded) = monte_carlo(
        &grid,
        replicates,
        derive_named(seed, "scaling"),
        |m| process.prepare(m),
        |p, s| {
            let x = transform_path(p.sample(s)?, Some(g));
            Ok(ecdf_deviation(&x, &[x0], &[f0])[0])
        },
    )?;
    let j1_x0 = indicator_coefficients(&indicator(x0))?.1;
    let expected = if iid {
        Some(-0.5)
    } else if j1_x0.abs() > 1e-8 {
        Some((hurst - 1.0).max(-0.5))
    } else {
        None
    };
    let scaling = report_from(
        &grid,
        &samples,
        replicates,
        excluded,
        format!("F_N({x0}) of {g} of {}", process.describe()),
        expected,
    )?;
    Ok(EmpiricalProcessReport {
        x_grid: x_grid.to_vec(),
        j1_estimates,
        j1_exact,
        marginal_cdf,
        cross_correlations,
        bridge_correlations,
        n,
        replicates,
        iid,
        x0,
        scaling,
    })
}

/// `(c_0, c_1)` of an indicator composition: `P(G(Y) <= x)` and `J_1(x)`.
fn indicator_coefficients(t: &TransformSpec) -> Result<(f64, f64)> {
    match hermite_expand(t, 1, QUAD_ORDER) {
        Ok(e) => Ok((e.coefficient(0), e.coefficient(1))),
        // the indicator is a.s. constant: P is 0 or 1 and J_1 vanishes
        Err(LrdError::DegenerateTransform(_)) => {
            Ok((if t.eval(0.0) > 0.5 { 1.0 } else { 0.0 }, 0.0))
        }
        Err(e) => Err(e),
    }
}

fn j1_monte_carlo(g: &TransformSpec, x_grid: &[f64], seed: u64) -> Vec<f64> {
    use rand::Rng as _;
    use rand_distr::StandardNormal;
    let mut rng = rng_from_seed(seed);
    let mut sums = vec![0.0; x_grid.len()];
    for _ in 0..J1_CALIBRATION {
        let y: f64 = rng.sample(StandardNormal);
        let gy = g.eval(y);
        for (s, x) in sums.iter_mut().zip(x_grid) {
            if gy <= *x {
                *s += y;
            }
        }
    }
    sums.iter().map(|s| s / J1_CALIBRATION as f64).collect()
}

fn ecdf_deviation(x: &[f64], grid: &[f64], cdf: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    grid.iter()
        .zip(cdf)
        .map(|(t, f)| x.iter().filter(|v| **v <= *t).count() as f64 / n - f)
        .collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (stats::mean(a), stats::mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Correlation of a Brownian bridge at `F(x) = s` and `F(y) = t`.
pub fn bridge_correlation(s: f64, t: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    lo * (1.0 - hi) / (s * (1.0 - s) * t * (1.0 - t)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittleRateReport {
    pub scaling: ScalingReport,
    pub d_latent: f64,
    /// Minimizer of the population Whittle objective for `X = G(Y)`.
    pub pseudo_true_d: f64,
    pub rho1: Option<Rho1Report>,
    /// Set only when `rho_1` clears its truncation bound.
    pub perturbed: bool,
    pub boundary_hits: usize,
}

/// `argmin_t sum_n gamma_X(n) a_t(n)`, the limit of the Whittle estimate on
/// `X = G(Y)` for unit-variance Gaussian `Y` with correlations `rho`.
pub fn pseudo_true_d(g: &HermiteExpansion, rho: &[f64]) -> Result<f64> {
    let m = g.truncation_order;
    let gamma: Vec<f64> = rho
        .iter()
        .map(|r| {
            (1..=m)
                .map(|k| factorial(k) * g.coefficient(k).powi(2) * r.powi(k as i32))
                .sum()
        })
        .collect();
    let lags = gamma.len() - 1;
    let objective = |t: f64| match a_coefficients_exact(t, lags) {
        Ok(a) => gamma[0] * a[0] + 2.0 * (1..=lags).map(|k| gamma[k] * a[k]).sum::<f64>(),
        Err(_) => f64::INFINITY,
    };
    let min = golden_section(objective, -0.49, 0.49, 1e-8);
    if min.at_boundary {
        return Err(LrdError::Numeric(
            "pseudo-true parameter on the search boundary".into(),
        ));
    }
    Ok(min.argmin)
}

/// Error decay of the FARIMA Whittle estimate on `X = G(Y)`, `Y` Gaussian
/// FARIMA(0, H - 1/2, 0) scaled to unit variance. A perturbation counts
/// only if its `rho_1` is certified non-zero.
pub fn whittle_rate_experiment(
    hurst: f64,
    perturbation: Option<&TransformSpec>,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<WhittleRateReport> {
    check_grid(n_grid, replicates)?;
    let d = hurst - 0.5;
    if !(d > 0.0 && d < 0.5) {
        return Err(LrdError::Domain(format!("H = {hurst} outside (1/2, 1)")));
    }
    let g = perturbation.cloned().unwrap_or(TransformSpec::Identity);
    if g.polynomial_coefficients().is_none() {
        return Err(LrdError::Input(format!(
            "perturbation {g} must be a polynomial"
        )));
    }
    let acov = farima_autocovariance(d, PSEUDO_TRUE_LAGS)?;
    let rho: Vec<f64> = acov.iter().map(|v| v / acov[0]).collect();
    let sd = acov[0].sqrt();
    let expansion = hermite_expand(&g, EXPANSION_ORDER, QUAD_ORDER)?;
    let theta = if g == TransformSpec::Identity {
        d
    } else {
        pseudo_true_d(&expansion, &rho)?
    };
    let rho1 = if g == TransformSpec::Identity {
        None
    } else {
        let gp = g.derivative()?;
        let grad = SpectralModel::new(theta, 1.0)
            .grad_a_coefficients(RHO1_LAGS, crate::whittle::DEFAULT_INVERSION_GRID)?;
        let rho_win = symmetric(&rho[..=RHO1_LAGS]);
        let grad_win = symmetric(&grad);
        let report = match hermite_expand(&gp, EXPANSION_ORDER, QUAD_ORDER) {
            Ok(e) => {
                // the estimate ignores additive constants, so rho_1 is taken for G - E G
                let mut centered = expansion.clone();
                centered.coefficients[0] = 0.0;
                compute_rho1_report(&centered, &e, &rho_win, &grad_win)?
            }
            // constant derivative: G is affine and rho_1 vanishes
            Err(LrdError::DegenerateTransform(_)) => Rho1Report {
                value: 0.0,
                mean_term: 0.0,
                truncation_bound: 0.0,
                max_lag: RHO1_LAGS,
                max_order: EXPANSION_ORDER,
            },
            Err(e) => return Err(e),
        };
        Some(report)
    };
    let perturbed = rho1.as_ref().is_some_and(|r| r.is_nonzero());
    let boundary = std::sync::atomic::AtomicUsize::new(0);
    let (samples, excluded) = monte_carlo(
        n_grid,
        replicates,
        seed,
        |n| crate::process::FarimaSpec { d, n }.sampler(),
        |s, seed| {
            let x: Vec<f64> = s.sample(seed).iter().map(|v| g.eval(v / sd)).collect();
            let fit = whittle_farima(&x)?;
            if fit.diagnostics.boundary_hit {
                boundary.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
            Ok(fit.d_hat - theta)
        },
    )?;
    let boundary_hits = boundary.into_inner();
    if boundary_hits as f64 > MAX_EXCLUDED_SHARE * (replicates * n_grid.len()) as f64 {
        return Err(LrdError::Numeric(format!(
            "Whittle optimizer hit the boundary in {boundary_hits} replicates"
        )));
    }
    let expected = if perturbed { hurst - 1.0 } else { -0.5 };
    let scaling = report_from(
        n_grid,
        &samples,
        replicates,
        excluded,
        format!("Whittle d error on {g} of farima(d={d})"),
        Some(expected),
    )?;
    Ok(WhittleRateReport {
        scaling,
        d_latent: d,
        pseudo_true_d: theta,
        rho1,
        perturbed,
        boundary_hits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub replicates: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_distance: f64,
    /// Mean Bartlett long-run variance over replicates, bandwidth `N^{1/3}`.
    pub long_run_variance: f64,
    /// Variance of the scaled sums across replicates.
    pub scaled_sum_variance: f64,
    pub bandwidth: usize,
    /// `delta_2(n)` for `n = 0..` by coupling.
    pub physical_dependence: Vec<f64>,
}

const PHYSICAL_LAGS: usize = 10;
const PHYSICAL_PAIRS: usize = 2000;

/// Shape of `N^{-1/2} sum_n (X(n) - mean)` for `X = F(Y)` with `Y` short
/// memory and `F` Lipschitz.
pub fn clt_stability_experiment(
    spec: &WeakDepSpec,
    f: &TransformSpec,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<NormalityReport> {
    spec.validate()?;
    f.validate()?;
    if !f.is_lipschitz() {
        return Err(LrdError::Input(format!(
            "{f} is not Lipschitz; clip it first"
        )));
    }
    if n < 4096 {
        return Err(LrdError::Input("CLT runs need N >= 4096".into()));
    }
    if replicates < 1000 {
        return Err(LrdError::Input("CLT runs need >= 1000 replicates".into()));
    }
    let process = ProcessSpec::Weak(*spec);
    let prepared = process.prepare(n + f.lags())?;
    let bandwidth = (n as f64).cbrt().floor() as usize;
    let rows: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let x = transform_path(prepared.sample(derive_seed(seed, r as u64))?, Some(f));
            let s = x.iter().sum::<f64>() / (x.len() as f64).sqrt();
            Ok((s, stats::long_run_variance_bartlett(&x, bandwidth)))
        })
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let centered = stats::centered(&sums);
    let long_run_variance = stats::mean(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    if !(long_run_variance > 0.0) {
        return Err(LrdError::Numeric(format!(
            "long-run variance {long_run_variance} is not positive; bandwidth {bandwidth}"
        )));
    }
    let physical_dependence = (0..=PHYSICAL_LAGS)
        .map(|lag| {
            estimate_physical_dependence(
                spec,
                lag,
                PHYSICAL_PAIRS,
                derive_seed(derive_named(seed, "delta2"), lag as u64),
            )
        })
        .collect::<Result<_>>()?;
    Ok(NormalityReport {
        n,
        replicates,
        skewness: stats::skewness(&centered),
        excess_kurtosis: stats::excess_kurtosis(&centered),
        ks_distance: stats::ks_fitted_normal(&centered),
        long_run_variance,
        scaled_sum_variance: stats::variance(&centered),
        bandwidth,
        physical_dependence,
    })
}

/// Two independent samples of `N^{-H_G} sum_n (G(Y(n)) - E G)` on fGn,
/// compared with a two-sample KS test. Agreement supports using one of them
/// as the reference law for non-central limits.
pub fn surrogate_consistency(
    hurst: f64,
    g: &TransformSpec,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<KsTest> {
    let process = ProcessSpec::Fgn { hurst };
    let mu = population_mean(&process, Some(g), seed)?;
    let k = hermite_rank(g, crate::hermite::DEFAULT_QUAD_TOL, EXPANSION_ORDER)?
        .rank
        .order()
        .ok_or_else(|| LrdError::Input(format!("{g} has no rank up to {EXPANSION_ORDER}")))?;
    let hg = ((hurst - 1.0) * k as f64 + 1.0).max(0.5);
    let sampler = FgnSpec::new(hurst, n).sampler()?;
    let draw = |name: &str| -> Vec<f64> {
        let base = derive_named(seed, name);
        (0..replicates)
            .into_par_iter()
            .map(|r| {
                let x = sampler.sample(derive_seed(base, r as u64));
                x.iter().map(|v| g.eval(*v) - mu).sum::<f64>() / (n as f64).powf(hg)
            })
            .collect()
    };
    Ok(stats::ks_two_sample(
        &draw("surrogate-a"),
        &draw("surrogate-b"),
    ))
}

/// `int_{-pi}^{pi} f_X / g_t` up to the factor `2 pi`; exposed for tests of
/// the pseudo-true parameter.
pub fn population_whittle_objective(gamma: &[f64], t: f64) -> Result<f64> {
    let lags = gamma.len() - 1;
    let a = a_coefficients_exact(t, lags)?;
    Ok((gamma[0] * a[0] + 2.0 * (1..=lags).map(|k| gamma[k] * a[k]).sum::<f64>()) / (2.0 * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSlopeReport {
    pub lags: Vec<usize>,
    /// Autocovariance of `G(X)` averaged over replicates.
    pub mean_autocovariance: Vec<f64>,
    pub fitted_slope: f64,
    /// `k (2H - 2)` with `k` the Hermite rank of `G`.
    pub expected_slope: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub replicates: usize,
}

/// Log-log slope of the replicate-averaged autocovariance of `G(fGn(H))`
/// over lags `lo..=hi`.
pub fn covariance_slope_experiment(
    hurst: f64,
    g: &TransformSpec,
    n: usize,
    (lo, hi): (usize, usize),
    replicates: usize,
    seed: u64,
) -> Result<CovarianceSlopeReport> {
    if !g.is_instantaneous() {
        return Err(LrdError::Input(format!("{g} is not instantaneous")));
    }
    if lo == 0 || hi <= lo + 2 || hi >= n / 4 {
        return Err(LrdError::Input(format!(
            "lag range {lo}..{hi} unusable for N = {n}"
        )));
    }
    if replicates == 0 {
        return Err(LrdError::Input("need at least one replicate".into()));
    }
    let sampler = FgnSpec::new(hurst, n).sampler()?;
    let acovs: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let x = transform_path(sampler.sample(derive_seed(seed, r as u64)), Some(g));
            stats::autocovariance(&x, hi)
        })
        .collect();
    let lags: Vec<usize> = (lo..=hi).collect();
    let mean_autocovariance: Vec<f64> = lags
        .iter()
        .map(|k| acovs.iter().map(|a| a[*k]).sum::<f64>() / replicates as f64)
        .collect();
    if mean_autocovariance.iter().any(|v| !(*v > 0.0)) {
        return Err(LrdError::Numeric(
            "non-positive mean autocovariance in the lag range".into(),
        ));
    }
    let lx: Vec<f64> = lags.iter().map(|k| (*k as f64).ln()).collect();
    let ly: Vec<f64> = mean_autocovariance.iter().map(|v| v.ln()).collect();
    let fitted_slope = stats::ols(&lx, &ly)?.slope;
    let expected_slope = hermite_rank(g, crate::hermite::DEFAULT_QUAD_TOL, EXPANSION_ORDER)?
        .rank
        .order()
        .map(|k| k as f64 * (2.0 * hurst - 2.0));
    Ok(CovarianceSlopeReport {
        lags,
        mean_autocovariance,
        fitted_slope,
        expected_slope,
        n,
        replicates,
    })
}
