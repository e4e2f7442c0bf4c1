//! Hermite polynomials, Hermite expansions of transformations of a standard
//! Gaussian variable, and the different notions of rank: the Hermite rank
//! computed by quadrature, the power rank estimated from a sample of the
//! input marginal, and the generalized rank read off cross-moments of two
//! observed series.

use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::quadrature::GaussianRule;
use crate::stats;
use crate::transform::TransformSpec;

pub const DEFAULT_QUAD_ORDER: usize = 128;
pub const DEFAULT_MAX_ORDER: usize = 10;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
/// Threshold, in standard errors, for Monte Carlo rank statistics.
pub const DEFAULT_MC_THRESHOLD: f64 = 4.0;
pub const DEFAULT_POWER_STEP: f64 = 0.05;

/// Probabilists' Hermite polynomial `H_m(x)` by the three-term recurrence.
pub fn hermite_poly(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..m {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), ..., H_max(x)`.
pub fn hermite_values(max: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(max + 1);
    v.push(1.0);
    if max >= 1 {
        v.push(x);
    }
    for k in 1..max {
        let next = x * v[k] - k as f64 * v[k - 1];
        v.push(next);
    }
    v
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Truncated Hermite expansion `G(x) = sum_m c_m H_m(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteExpansion {
    /// `c_0..=c_M`.
    pub coefficients: Vec<f64>,
    pub truncation_order: usize,
    /// Variance of `G(Z)`, i.e. `sum_{m>=1} m! c_m^2` over all orders.
    pub l2_norm_sq: f64,
    /// Share of the variance carried by orders above the truncation.
    pub residual_fraction: f64,
}

impl HermiteExpansion {
    pub fn coefficient(&self, m: usize) -> f64 {
        self.coefficients.get(m).copied().unwrap_or(0.0)
    }

    /// `m! c_m^2 / Var G(Z)`, the share of variance carried by order `m`.
    pub fn normalized(&self, m: usize) -> f64 {
        factorial(m) * self.coefficient(m).powi(2) / self.l2_norm_sq
    }

    pub fn mean(&self) -> f64 {
        self.coefficient(0)
    }

    /// Evaluates the truncated series at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        hermite_values(self.truncation_order, x)
            .iter()
            .zip(&self.coefficients)
            .map(|(h, c)| h * c)
            .sum()
    }
}

fn rule_for(g: &TransformSpec, quad_order: usize) -> Result<GaussianRule> {
    let bps = g.breakpoints();
    if bps.is_empty() {
        GaussianRule::gauss_hermite(quad_order)
    } else {
        Ok(GaussianRule::piecewise(&bps))
    }
}

/// Hermite coefficients `c_m = E[G(Z) H_m(Z)] / m!` for `m = 0..=max_order`.
///
/// Smooth transforms use a `quad_order`-point Gauss-Hermite rule; transforms
/// with jumps or kinks switch to a composite rule split at the breakpoints.
pub fn hermite_expand(
    g: &TransformSpec,
    max_order: usize,
    quad_order: usize,
) -> Result<HermiteExpansion> {
    if !g.is_instantaneous() {
        return Err(LrdError::Input(format!(
            "{g} is not instantaneous; use generalized_rank for lagged transforms"
        )));
    }
    g.validate()?;
    if max_order < 1 {
        return Err(LrdError::Input("expansion order must be at least 1".into()));
    }
    if quad_order < max_order + 1 {
        return Err(LrdError::Input(format!(
            "quadrature order {quad_order} too small for expansion order {max_order}"
        )));
    }
    let rule = rule_for(g, quad_order)?;
    let mut sums = vec![0.0; max_order + 1];
    let mut second = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let gx = g.eval(x);
        if w == 0.0 {
            continue;
        }
        let h = hermite_values(max_order, x);
        for (s, hm) in sums.iter_mut().zip(&h) {
            *s += w * gx * hm;
        }
        second += w * gx * gx;
    }
    if !second.is_finite() || sums.iter().any(|s| !s.is_finite()) {
        return Err(LrdError::Integrability(format!(
            "quadrature of {g} is not finite"
        )));
    }
    let coefficients: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(m, s)| s / factorial(m))
        .collect();
    let mean = coefficients[0];
    let variance = second - mean * mean;
    if !(variance > 1e-14 * second.max(1.0)) {
        return Err(LrdError::DegenerateTransform(format!(
            "{g} is constant under the Gaussian weight"
        )));
    }
    let captured: f64 = (1..=max_order)
        .map(|m| factorial(m) * coefficients[m].powi(2))
        .sum();
    let residual_fraction = ((variance - captured).max(0.0) / variance).clamp(0.0, 1.0);
    Ok(HermiteExpansion {
        coefficients,
        truncation_order: max_order,
        l2_norm_sq: variance,
        residual_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    GaussianQuadrature,
    MonteCarloPower,
    CrossMomentGeneralized,
}

/// Either a rank or the statement that no order up to the search limit
/// qualified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank {
    Order(usize),
    NoneUpTo(usize),
}

impl Rank {
    pub fn order(&self) -> Option<usize> {
        match self {
            Rank::Order(k) => Some(*k),
            Rank::NoneUpTo(_) => None,
        }
    }
}

impl std::fmt::Display for Rank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rank::Order(k) => write!(f, "{k}"),
            Rank::NoneUpTo(m) => write!(f, "none-up-to-{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEvidence {
    pub order: usize,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: Rank,
    pub method: RankMethod,
    pub evidence: Vec<RankEvidence>,
    pub tolerance: f64,
    pub max_order_searched: usize,
    /// Raw per-order estimates: Hermite coefficients, derivatives of
    /// `E G(Y + y)` at zero, or the largest cross-moment over lags.
    pub estimates: Vec<f64>,
    /// Per-order, per-lag standardized cross-moments (generalized rank only),
    /// lags running from `-max_lag` to `max_lag`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag_statistics: Option<Vec<Vec<f64>>>,
}

fn first_crossing(evidence: &[RankEvidence], max_order: usize) -> Rank {
    evidence
        .iter()
        .find(|e| e.statistic >= e.threshold)
        .map(|e| Rank::Order(e.order))
        .unwrap_or(Rank::NoneUpTo(max_order))
}

/// Hermite rank: the first order whose share of variance
/// `m! c_m^2 / Var G(Z)` reaches `tol`.
pub fn hermite_rank(g: &TransformSpec, tol: f64, max_order: usize) -> Result<RankReport> {
    hermite_rank_with(g, tol, max_order, DEFAULT_QUAD_ORDER.max(max_order + 1))
}

pub fn hermite_rank_with(
    g: &TransformSpec,
    tol: f64,
    max_order: usize,
    quad_order: usize,
) -> Result<RankReport> {
    if !(tol > 0.0) {
        return Err(LrdError::Input("rank tolerance must be positive".into()));
    }
    let exp = hermite_expand(g, max_order, quad_order)?;
    let evidence: Vec<RankEvidence> = (1..=max_order)
        .map(|m| RankEvidence {
            order: m,
            statistic: exp.normalized(m),
            threshold: tol,
        })
        .collect();
    Ok(RankReport {
        rank: first_crossing(&evidence, max_order),
        method: RankMethod::GaussianQuadrature,
        evidence,
        tolerance: tol,
        max_order_searched: max_order,
        estimates: exp.coefficients[1..].to_vec(),
        lag_statistics: None,
    })
}

/// Hermite rank of `x -> G(x + z)`.
pub fn shifted_rank(g: &TransformSpec, z: f64, tol: f64, max_order: usize) -> Result<RankReport> {
    hermite_rank(&TransformSpec::shifted(g.clone(), z), tol, max_order)
}

/// Options for [`power_rank`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRankOptions {
    pub max_order: usize,
    pub step: f64,
    /// Required size of a derivative estimate in standard errors.
    pub threshold: f64,
    /// Noise floor relative to the standard deviation of `G(Y)`; keeps
    /// rounding in high-order differences from looking significant.
    pub relative_floor: f64,
}

impl Default for PowerRankOptions {
    fn default() -> Self {
        PowerRankOptions {
            max_order: 4,
            step: DEFAULT_POWER_STEP,
            threshold: DEFAULT_MC_THRESHOLD,
            relative_floor: 1e-6,
        }
    }
}

/// Five-point central-difference weights on offsets `-2h..=2h` for
/// derivative orders 1 to 4, before division by `h^order`.
const STENCIL: [[f64; 5]; 4] = [
    [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    [
        -1.0 / 12.0,
        16.0 / 12.0,
        -30.0 / 12.0,
        16.0 / 12.0,
        -1.0 / 12.0,
    ],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

/// Power rank: the first order at which `G_inf(y) = E G(Y + y)` has a
/// nonzero derivative at `y = 0`, estimated from draws of the marginal of
/// `Y` with common random numbers across the stencil.
pub fn power_rank(
    g: &TransformSpec,
    y_sample: &[f64],
    opts: PowerRankOptions,
) -> Result<RankReport> {
    if y_sample.is_empty() {
        return Err(LrdError::Input("power rank needs a nonempty sample".into()));
    }
    if opts.max_order == 0 || opts.max_order > 4 {
        return Err(LrdError::Input("power rank supports orders 1 to 4".into()));
    }
    if !(opts.step > 0.0) {
        return Err(LrdError::Input(
            "finite-difference step must be positive".into(),
        ));
    }
    if !g.is_instantaneous() {
        return Err(LrdError::Input(format!("{g} is not instantaneous")));
    }
    let n = y_sample.len() as f64;
    let values: Vec<f64> = y_sample.iter().map(|&y| g.eval(y)).collect();
    let scale = if values.len() > 1 {
        stats::std_dev(&values)
    } else {
        0.0
    };

    let mut per_order = vec![Vec::with_capacity(y_sample.len()); opts.max_order];
    for &y in y_sample {
        let f: Vec<f64> = (-2..=2).map(|k| g.eval(y + k as f64 * opts.step)).collect();
        for (r, acc) in per_order.iter_mut().enumerate() {
            let d: f64 = STENCIL[r].iter().zip(&f).map(|(w, v)| w * v).sum();
            acc.push(d / opts.step.powi(r as i32 + 1));
        }
    }

    let mut evidence = Vec::with_capacity(opts.max_order);
    let mut estimates = Vec::with_capacity(opts.max_order);
    for (r, d) in per_order.iter().enumerate() {
        let est = stats::mean(d);
        let se = if d.len() > 1 {
            stats::std_dev(d) / n.sqrt()
        } else {
            0.0
        };
        let floor = opts.relative_floor * scale.max(f64::MIN_POSITIVE);
        let noise = se.max(floor);
        estimates.push(est);
        evidence.push(RankEvidence {
            order: r + 1,
            statistic: est.abs() / noise,
            threshold: opts.threshold,
        });
    }
    Ok(RankReport {
        rank: first_crossing(&evidence, opts.max_order),
        method: RankMethod::MonteCarloPower,
        evidence,
        tolerance: opts.threshold,
        max_order_searched: opts.max_order,
        estimates,
        lag_statistics: None,
    })
}

/// Generalized rank of a series `x` observed alongside its Gaussian driver
/// `y`: the first order `m` for which some cross-moment
/// `E[(X(0) - E X(0)) Y(n)^m]`, `|n| <= max_lag`, is significantly nonzero.
///
/// Each lag's sample cross-moment is standardized by a Bartlett long-run
/// standard error with bandwidth `floor(len^(1/3))`.
pub fn generalized_rank(
    x: &[f64],
    y: &[f64],
    max_order: usize,
    max_lag: usize,
    threshold: f64,
) -> Result<RankReport> {
    if x.len() != y.len() {
        return Err(LrdError::Input(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 100 {
        return Err(LrdError::Input(
            "generalized rank needs at least 100 points".into(),
        ));
    }
    if max_lag * 4 >= n {
        return Err(LrdError::Input(
            "max_lag must be small relative to the length".into(),
        ));
    }
    if max_order == 0 || !(threshold > 0.0) {
        return Err(LrdError::Input(
            "need max_order >= 1 and a positive threshold".into(),
        ));
    }
    let xc = stats::centered(x);
    let lag = max_lag as isize;
    let mut evidence = Vec::with_capacity(max_order);
    let mut estimates = Vec::with_capacity(max_order);
    let mut lag_statistics = Vec::with_capacity(max_order);
    for m in 1..=max_order {
        let ym: Vec<f64> = y.iter().map(|v| v.powi(m as i32)).collect();
        let mut stats_m = Vec::with_capacity(2 * max_lag + 1);
        let mut best = (0.0f64, 0.0f64);
        for k in -lag..=lag {
            let products: Vec<f64> = (0..n as isize)
                .filter_map(|t| {
                    let s = t + k;
                    (s >= 0 && s < n as isize).then(|| xc[t as usize] * ym[s as usize])
                })
                .collect();
            let est = stats::mean(&products);
            let bw = (products.len() as f64).cbrt().floor() as usize;
            let lrv = stats::long_run_variance_bartlett(&products, bw).max(0.0);
            let se = (lrv / products.len() as f64).sqrt();
            let z = if se > 0.0 {
                est.abs() / se
            } else if est != 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if z > best.0 || stats_m.is_empty() {
                best = (z, est);
            }
            stats_m.push(z);
        }
        evidence.push(RankEvidence {
            order: m,
            statistic: best.0,
            threshold,
        });
        estimates.push(best.1);
        lag_statistics.push(stats_m);
    }
    Ok(RankReport {
        rank: first_crossing(&evidence, max_order),
        method: RankMethod::CrossMomentGeneralized,
        evidence,
        tolerance: threshold,
        max_order_searched: max_order,
        estimates,
        lag_statistics: Some(lag_statistics),
    })
}

/// Hurst index of a rank-`k` transform of a Gaussian series with index `h`:
/// `max(1/2, (h - 1) k + 1)`.
pub fn hurst_of_transform(h: f64, k: usize) -> Result<f64> {
    if !(h > 0.5 && h < 1.0) {
        return Err(LrdError::Domain(format!(
            "Hurst index {h} outside (1/2, 1)"
        )));
    }
    if k == 0 {
        return Err(LrdError::Domain("rank must be at least 1".into()));
    }
    Ok(((h - 1.0) * k as f64 + 1.0).max(0.5))
}

/// `Cov[a(Z1), b(Z2)] = sum_{m=1..M} m! a_m b_m rho^m` for a standard
/// bivariate Gaussian pair with correlation `rho`.
pub fn cross_covariance_expansion(
    a: &HermiteExpansion,
    b: &HermiteExpansion,
    rho: f64,
    max_order: usize,
) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(LrdError::Domain(format!(
            "correlation {rho} outside [-1, 1]"
        )));
    }
    if a.truncation_order < max_order || b.truncation_order < max_order {
        return Err(LrdError::Input(format!(
            "expansions truncated below order {max_order}"
        )));
    }
    Ok((1..=max_order)
        .map(|m| factorial(m) * a.coefficients[m] * b.coefficients[m] * rho.powi(m as i32))
        .sum())
}

/// `E[a(Z1) b(Z2)]` including the product of means (the `m = 0` term).
pub fn cross_moment_expansion(
    a: &HermiteExpansion,
    b: &HermiteExpansion,
    rho: f64,
    max_order: usize,
) -> Result<f64> {
    Ok(a.mean() * b.mean() + cross_covariance_expansion(a, b, rho, max_order)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_poly_examples() {
        assert_eq!(hermite_poly(0, 7.3), 1.0);
        assert_eq!(hermite_poly(3, 2.0), 2.0);
        // independent closed form H_4 = x^4 - 6x^2 + 3
        let h4 = |x: f64| x.powi(4) - 6.0 * x * x + 3.0;
        assert_eq!(hermite_poly(4, 1.0), -2.0);
        for x in [-2.5, -0.3, 0.0, 1.7] {
            assert_relative_eq!(hermite_poly(4, x), h4(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn expansion_of_square_and_identity() {
        let sq = hermite_expand(&TransformSpec::Square, 4, 64).unwrap();
        let want = [1.0, 0.0, 1.0, 0.0, 0.0];
        for (c, w) in sq.coefficients.iter().zip(want) {
            assert!((c - w).abs() < 1e-12, "{:?}", sq.coefficients);
        }
        assert!(sq.residual_fraction < 1e-12);
        let id = hermite_expand(&TransformSpec::Identity, 4, 64).unwrap();
        assert!((id.coefficients[1] - 1.0).abs() < 1e-13);
        assert!(id
            .coefficients
            .iter()
            .enumerate()
            .all(|(m, c)| m == 1 || c.abs() < 1e-13));
    }

    #[test]
    fn expansion_of_absolute_value() {
        let e = hermite_expand(&TransformSpec::Absolute, 6, 128).unwrap();
        assert!(e.coefficients[1].abs() < 1e-12);
        // (E|Z|^3 - E|Z|)/2 with E|Z| = sqrt(2/pi), E|Z|^3 = 2 sqrt(2/pi)
        let oracle = (2.0 / std::f64::consts::PI).sqrt() / 2.0;
        assert_relative_eq!(e.coefficients[2], oracle, epsilon = 1e-10);
        assert_relative_eq!(e.coefficients[2], 0.39894, epsilon = 1e-5);
    }

    #[test]
    fn indicator_coefficients_match_closed_form() {
        // E[1{Z<=t} H_m(Z)] = -phi(t) H_{m-1}(t) for m >= 1
        let t = 0.4;
        let e = hermite_expand(&TransformSpec::IndicatorBelow(t), 6, 128).unwrap();
        assert_relative_eq!(e.coefficients[0], stats::normal_cdf(t), epsilon = 1e-12);
        for m in 1..=6 {
            let exact = -stats::normal_pdf(t) * hermite_poly(m - 1, t) / factorial(m);
            assert_relative_eq!(e.coefficients[m], exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn errors_for_constant_and_lagged() {
        let constant = TransformSpec::Polynomial(vec![3.0]);
        assert!(matches!(
            hermite_rank(&constant, 1e-8, 6),
            Err(LrdError::DegenerateTransform(_))
        ));
        let lagged = TransformSpec::LaggedLinear(vec![1.0, -1.0]);
        assert!(matches!(
            hermite_expand(&lagged, 4, 64),
            Err(LrdError::Input(_))
        ));
        assert!(hermite_expand(&TransformSpec::Square, 4, 4).is_err());
    }

    #[test]
    fn rank_examples() {
        let r = |g: TransformSpec| hermite_rank(&g, 1e-8, 6).unwrap().rank;
        assert_eq!(r(TransformSpec::Identity), Rank::Order(1));
        assert_eq!(r(TransformSpec::Square), Rank::Order(2));
        assert_eq!(r(TransformSpec::HermiteBasis(3)), Rank::Order(3));
        assert_eq!(r(TransformSpec::Cube), Rank::Order(1));
        assert_eq!(r(TransformSpec::Absolute), Rank::Order(2));
    }

    #[test]
    fn rank_none_when_order_exceeds_search() {
        let rep = hermite_rank(&TransformSpec::HermiteBasis(8), 1e-8, 6).unwrap();
        assert_eq!(rep.rank, Rank::NoneUpTo(6));
        assert!(rep.evidence.iter().all(|e| e.statistic < e.threshold));
    }

    #[test]
    fn shifted_rank_examples() {
        let h2 = TransformSpec::HermiteBasis(2);
        assert_eq!(
            shifted_rank(&h2, 0.1, 1e-8, 10).unwrap().rank,
            Rank::Order(1)
        );
        assert_eq!(
            shifted_rank(&h2, 0.0, 1e-8, 10).unwrap().rank,
            Rank::Order(2)
        );
        let h3 = TransformSpec::HermiteBasis(3);
        assert_eq!(
            shifted_rank(&h3, 0.05, 1e-8, 10).unwrap().rank,
            Rank::Order(1)
        );
        // analytic: E[H_2(Z + 0.1) Z] = 2 * 0.1
        let e = hermite_expand(&TransformSpec::shifted(h2, 0.1), 4, 64).unwrap();
        assert_relative_eq!(e.coefficients[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn hurst_of_transform_examples() {
        assert_relative_eq!(hurst_of_transform(0.9, 2).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(hurst_of_transform(0.7, 2).unwrap(), 0.5);
        assert_eq!(hurst_of_transform(0.8, 1).unwrap(), 0.8);
        assert!(hurst_of_transform(0.5, 1).is_err());
        assert!(hurst_of_transform(1.0, 1).is_err());
    }

    #[test]
    fn cross_covariance_examples() {
        let sq = hermite_expand(&TransformSpec::Square, 6, 64).unwrap();
        let id = hermite_expand(&TransformSpec::Identity, 6, 64).unwrap();
        for rho in [-0.7, 0.2, 0.9] {
            let c = cross_covariance_expansion(&sq, &sq, rho, 6).unwrap();
            assert_relative_eq!(c, 2.0 * rho * rho, epsilon = 1e-12);
        }
        assert_relative_eq!(
            cross_covariance_expansion(&id, &id, 0.3, 6).unwrap(),
            0.3,
            epsilon = 1e-13
        );
        assert_eq!(cross_covariance_expansion(&sq, &id, 0.0, 6).unwrap(), 0.0);
        assert!(cross_covariance_expansion(&sq, &id, 1.5, 6).is_err());
        assert!(cross_covariance_expansion(&sq, &id, 0.5, 8).is_err());
    }

    #[test]
    fn power_rank_identity_is_one() {
        let sample: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let rep = power_rank(
            &TransformSpec::Identity,
            &sample,
            PowerRankOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.rank, Rank::Order(1));
        assert!(power_rank(&TransformSpec::Identity, &[], PowerRankOptions::default()).is_err());
    }

    #[test]
    fn generalized_rank_length_mismatch() {
        let x = vec![0.0; 200];
        let y = vec![0.0; 199];
        assert!(matches!(
            generalized_rank(&x, &y, 3, 5, 4.0),
            Err(LrdError::Input(_))
        ));
    }
}
