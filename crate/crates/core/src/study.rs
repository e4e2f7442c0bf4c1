//! Simulation-assisted test of the rank-2 prediction `H2 = max(1/2, 2 H1 - 1)`.
//!
//! For each series: estimate `H1` on the centered data and `H2` on the
//! centered squares, compare `delta = H2 - max(1/2, 2 H1 - 1)` against the
//! same statistic on `R` fGn paths with Hurst index `H1`, and record the
//! percentile `P`. Under the fGn null `P` is roughly uniform.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::estimators::{estimate, Method};
use crate::process::FgnSpec;
use crate::rng::{derive_named, derive_seed, rng_from_seed};
use crate::stats::{self, FiveNumber};

pub const DEFAULT_REPLICATES: usize = 200;
pub const MIN_REPLICATES: usize = 50;
pub const DEFAULT_MIN_LENGTH: usize = 300;
pub const DEFAULT_H_WINDOW: (f64, f64) = (0.6, 0.9);
pub const HISTOGRAM_BINS: usize = 20;
/// Share of failed contrast replicates above which a record is an error.
pub const MAX_INVALID_SHARE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    #[serde(rename = "R")]
    pub replicates: usize,
    pub h_window: (f64, f64),
    pub min_length: usize,
    pub estimator: Method,
    pub master_seed: u64,
    /// Also build and analyse a synthetic fGn contrast group.
    pub contrast_group: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            replicates: DEFAULT_REPLICATES,
            h_window: DEFAULT_H_WINDOW,
            min_length: DEFAULT_MIN_LENGTH,
            estimator: Method::LocalWhittle,
            master_seed: 0,
            contrast_group: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(LrdError::Input(format!(
                "R = {} below the minimum of {MIN_REPLICATES}",
                self.replicates
            )));
        }
        let (lo, hi) = self.h_window;
        if !(lo > 0.5 && hi < 1.0 && lo < hi) {
            return Err(LrdError::Input(format!(
                "Hurst window [{lo}, {hi}] must lie inside (1/2, 1)"
            )));
        }
        if self.estimator == Method::WhittleFarima {
            return Err(LrdError::Input(
                "the study uses aggvar, gph or lw estimators".into(),
            ));
        }
        Ok(())
    }
}

/// One input series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub id: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub delta: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub contrast_deltas: Vec<f64>,
    pub invalid_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum ExclusionReason {
    /// Fewer observations than the minimum length.
    TooShort { n: usize },
    /// `H1` outside the selection window.
    HurstOutsideWindow { h1: f64 },
    /// The estimator failed on the series or its square.
    EstimatorFailed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    #[serde(flatten)]
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    #[serde(rename = "M_selected")]
    pub m_selected: usize,
    pub n_input: usize,
    pub median_delta: f64,
    #[serde(rename = "median_P")]
    pub median_p: f64,
    pub histogram: Vec<HistogramBin>,
    #[serde(rename = "H1")]
    pub h1: FiveNumber,
    #[serde(rename = "H2")]
    pub h2: FiveNumber,
    pub exclusions: Vec<Exclusion>,
}

/// Study output, optionally paired with the contrast-group rerun.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub estimator: Method,
    pub records: Vec<StudyRecord>,
    pub summary: StudySummary,
    pub contrast: Option<ContrastReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub records: Vec<StudyRecord>,
    pub summary: StudySummary,
}

/// `H2 - max(1/2, 2 H1 - 1)`.
pub fn delta_statistic(h1: f64, h2: f64) -> f64 {
    h2 - (2.0 * h1 - 1.0).max(0.5)
}

/// Fraction of `contrast` values `<= delta`.
pub fn percentile_score(delta: f64, contrast: &[f64]) -> Result<f64> {
    if contrast.is_empty() {
        return Err(LrdError::Input("empty contrast sample".into()));
    }
    let below = contrast.iter().filter(|v| **v <= delta).count();
    Ok(below as f64 / contrast.len() as f64)
}

/// Centered squares of the centered series.
pub fn centered_square(x: &[f64]) -> Vec<f64> {
    let sq: Vec<f64> = stats::centered(x).iter().map(|v| v * v).collect();
    stats::centered(&sq)
}

/// `(H1, H2)` of a series under `method` with default bandwidths.
pub fn squaring_pair(x: &[f64], method: Method) -> Result<(f64, f64)> {
    let h1 = estimate(&stats::centered(x), method, None)?.h_hat;
    let h2 = estimate(&centered_square(x), method, None)?.h_hat;
    Ok((h1, h2))
}

/// Contrast deltas from `replicates` fGn paths with index `h` and length `n`.
/// Failed replicates are dropped; more than 5% failures is an error.
pub fn run_contrast(
    h: f64,
    n: usize,
    replicates: usize,
    method: Method,
    seed: u64,
) -> Result<Vec<f64>> {
    if replicates == 0 {
        return Err(LrdError::Input("need at least one replicate".into()));
    }
    let sampler = FgnSpec::new(h, n).sampler()?;
    let results: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let path = sampler.sample(derive_seed(seed, r as u64));
            squaring_pair(&path, method)
                .ok()
                .map(|(a, b)| delta_statistic(a, b))
        })
        .collect();
    let invalid = results.iter().filter(|v| v.is_none()).count();
    if invalid as f64 > MAX_INVALID_SHARE * replicates as f64 {
        return Err(LrdError::Study(format!(
            "{invalid} of {replicates} contrast replicates failed at H = {h}, N = {n}"
        )));
    }
    Ok(results.into_iter().flatten().collect())
}

enum Outcome {
    Kept(StudyRecord),
    Dropped(Exclusion),
}

fn analyse(entry: &DatasetEntry, config: &StudyConfig) -> Result<Outcome> {
    let n = entry.values.len();
    let drop = |reason| {
        Ok(Outcome::Dropped(Exclusion {
            id: entry.id.clone(),
            reason,
        }))
    };
    if n < config.min_length {
        return drop(ExclusionReason::TooShort { n });
    }
    let (h1, h2) = match squaring_pair(&entry.values, config.estimator) {
        Ok(pair) => pair,
        Err(e) => {
            return drop(ExclusionReason::EstimatorFailed {
                message: e.to_string(),
            })
        }
    };
    let (lo, hi) = config.h_window;
    if !(lo..=hi).contains(&h1) {
        return drop(ExclusionReason::HurstOutsideWindow { h1 });
    }
    let seed = derive_named(config.master_seed, &entry.id);
    let contrast_deltas = run_contrast(h1, n, config.replicates, config.estimator, seed)?;
    let delta = delta_statistic(h1, h2);
    let p = percentile_score(delta, &contrast_deltas)?;
    Ok(Outcome::Kept(StudyRecord {
        id: entry.id.clone(),
        n,
        h1,
        h2,
        delta,
        p,
        invalid_replicates: config.replicates - contrast_deltas.len(),
        contrast_deltas,
    }))
}

/// Steps 1-4 on every series: selection, squaring analysis, contrast runs
/// and percentile scores.
pub fn run_study(
    dataset: &[DatasetEntry],
    config: &StudyConfig,
) -> Result<(Vec<StudyRecord>, StudySummary)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(LrdError::Input("empty dataset".into()));
    }
    let outcomes: Vec<Outcome> = dataset
        .par_iter()
        .map(|e| analyse(e, config))
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(r) => records.push(r),
            Outcome::Dropped(x) => exclusions.push(x),
        }
    }
    if records.is_empty() {
        return Err(LrdError::Study(format!(
            "no series survived selection ({} excluded)",
            exclusions.len()
        )));
    }
    let mut summary = summarize(&records)?;
    summary.n_input = dataset.len();
    summary.exclusions = exclusions;
    Ok((records, summary))
}

/// Runs the study and, when `config.contrast_group` is set, repeats it on a
/// synthetic fGn group matched to the selected records.
pub fn run_study_report(dataset: &[DatasetEntry], config: &StudyConfig) -> Result<StudyReport> {
    let (records, summary) = run_study(dataset, config)?;
    let contrast = if config.contrast_group {
        let group =
            make_contrast_group(&records, derive_named(config.master_seed, "contrast-group"))?;
        let inner = StudyConfig {
            master_seed: derive_named(config.master_seed, "contrast-study"),
            contrast_group: false,
            ..config.clone()
        };
        let (records, summary) = run_study(&group, &inner)?;
        Some(ContrastReport { records, summary })
    } else {
        None
    };
    Ok(StudyReport {
        estimator: config.estimator,
        records,
        summary,
        contrast,
    })
}

/// One fGn series per record with `H` and `N` drawn independently, uniformly
/// and with replacement from the observed `H1` and `N` values.
pub fn make_contrast_group(records: &[StudyRecord], seed: u64) -> Result<Vec<DatasetEntry>> {
    if records.is_empty() {
        return Err(LrdError::Input("no records to mirror".into()));
    }
    let mut rng = rng_from_seed(seed);
    let draws: Vec<(f64, usize)> = (0..records.len())
        .map(|_| {
            let h = records[rng.gen_range(0..records.len())].h1;
            let n = records[rng.gen_range(0..records.len())].n;
            (h, n)
        })
        .collect();
    draws
        .into_par_iter()
        .enumerate()
        .map(|(i, (h, n))| {
            let values = FgnSpec::new(h, n)
                .sampler()?
                .sample(derive_seed(seed, i as u64));
            Ok(DatasetEntry {
                id: format!("contrast-{:04}", i + 1),
                values,
            })
        })
        .collect()
}

/// Equal-width bins on `[0, 1]`; the value 1 falls in the last bin.
pub fn histogram_unit(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let mut counts = vec![0usize; bins];
    for v in values {
        let i = ((v * bins as f64).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            left: i as f64 / bins as f64,
            right: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect()
}

/// Medians, the 20-bin histogram of `P` and five-number summaries of the
/// Hurst estimates.
pub fn summarize(records: &[StudyRecord]) -> Result<StudySummary> {
    if records.is_empty() {
        return Err(LrdError::Input("no records to summarize".into()));
    }
    let col = |f: fn(&StudyRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let p = col(|r| r.p);
    Ok(StudySummary {
        m_selected: records.len(),
        n_input: records.len(),
        median_delta: stats::median(&col(|r| r.delta)),
        median_p: stats::median(&p),
        histogram: histogram_unit(&p, HISTOGRAM_BINS),
        h1: stats::five_number(&col(|r| r.h1)),
        h2: stats::five_number(&col(|r| r.h2)),
        exclusions: Vec::new(),
    })
}
