//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line with
//! the measured values; the determinism check reruns criteria 3-11 with the
//! same seeds and compares their serialized outputs byte for byte.

use std::time::Instant;

use lrdlab::estimators::{estimate, Method};
use lrdlab::hermite::{factorial, hermite_expand, hermite_poly, hermite_rank, shifted_rank, Rank};
use lrdlab::lab::{
    clt_stability_experiment, covariance_slope_experiment, dyadic_grid,
    empirical_process_experiment, sample_variance_experiment, whittle_rate_experiment,
};
use lrdlab::process::{FgnSpec, WeakDepSpec};
use lrdlab::quadrature::GaussianRule;
use lrdlab::rng::derive_seed;
use lrdlab::stats::{self, ks_uniform, median, normal_pdf};
use lrdlab::study::{centered_square, run_study_report, DatasetEntry, StudyConfig};
use lrdlab::transform::TransformSpec;

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
    /// Serialized results, compared across reruns.
    output: String,
}

fn t(s: &str) -> TransformSpec {
    s.parse().unwrap()
}

fn mean_h(hurst: f64, method: Method, square: bool, seed: u64) -> Vec<f64> {
    let sampler = FgnSpec::new(hurst, 8192).sampler().unwrap();
    (0..100)
        .map(|r| {
            let y = sampler.sample(derive_seed(seed, r));
            let x = if square { centered_square(&y) } else { y };
            estimate(&x, method, None).unwrap().h_hat
        })
        .collect()
}

fn c1_hermite_algebra() -> Outcome {
    let mut worst_rec = 0.0f64;
    for m in 1..=12 {
        for i in 0..=100 {
            let x = -5.0 + 0.1 * i as f64;
            let (a, b, c) = (
                hermite_poly(m + 1, x),
                x * hermite_poly(m, x),
                m as f64 * hermite_poly(m - 1, x),
            );
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
            worst_rec = worst_rec.max((a - b + c).abs() / scale);
        }
    }
    let rule = GaussianRule::gauss_hermite(64).unwrap();
    let mut worst_orth = 0.0f64;
    for p in 0..=8 {
        for q in 0..=8 {
            let e = rule.expectation(|x| hermite_poly(p, x) * hermite_poly(q, x));
            let want = if p == q { factorial(p) } else { 0.0 };
            worst_orth = worst_orth.max((e - want).abs());
        }
    }
    let mut worst_parseval = 0.0f64;
    for g in [
        "poly:1,2,-1,0.5",
        "cube",
        "square",
        "poly:0.3,0,0,0,0,0,0.1",
        "hermite:6",
    ] {
        let g = t(g);
        let e = hermite_expand(&g, 8, 128).unwrap();
        let sum: f64 = (1..=8)
            .map(|m| factorial(m) * e.coefficient(m).powi(2))
            .sum();
        let rule = GaussianRule::gauss_hermite(128).unwrap();
        let mu = rule.expectation(|x| g.eval(x));
        let var = rule.expectation(|x| (g.eval(x) - mu).powi(2));
        worst_parseval = worst_parseval.max((sum - var).abs());
    }
    Outcome {
        pass: worst_rec < 1e-10 && worst_orth < 1e-8 && worst_parseval < 1e-8,
        detail: format!("recurrence {worst_rec:.1e}, orthogonality {worst_orth:.1e}, Parseval {worst_parseval:.1e}"),
        output: String::new(),
    }
}

fn c2_rank_table() -> Outcome {
    let rank = |g: &TransformSpec| hermite_rank(g, 1e-8, 10).unwrap().rank;
    let mut bad = Vec::new();
    for (g, k) in [("identity", 1), ("cube", 1), ("square", 2), ("abs", 2)] {
        if rank(&t(g)) != Rank::Order(k) {
            bad.push(g.to_string());
        }
    }
    for m in 1..=6 {
        if rank(&TransformSpec::HermiteBasis(m)) != Rank::Order(m) {
            bad.push(format!("hermite:{m}"));
        }
    }
    let mut shifted = 0;
    for g in ["hermite:2", "hermite:3", "square", "abs", "cube"] {
        for z in [-0.5, -0.1, -0.01, 0.01, 0.1, 0.5] {
            shifted += 1;
            if shifted_rank(&t(g), z, 1e-8, 10).unwrap().rank != Rank::Order(1) {
                bad.push(format!("shift {z} of {g}"));
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("10 ranks and {shifted} shifted ranks checked, mismatches: {bad:?}"),
        output: String::new(),
    }
}

fn c3_covariance_law() -> Outcome {
    let r = covariance_slope_experiment(
        0.9,
        &TransformSpec::Square,
        1 << 15,
        (10, 100),
        50,
        derive_seed(SEED, 3),
    )
    .unwrap();
    Outcome {
        pass: (r.fitted_slope + 0.4).abs() <= 0.1,
        detail: format!("slope {:.4} (target -0.4 +/- 0.1)", r.fitted_slope),
        output: serde_json::to_string(&r).unwrap(),
    }
}

fn c4_calibration() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut out = Vec::new();
    for (mi, method) in [Method::Aggvar, Method::Gph, Method::LocalWhittle]
        .into_iter()
        .enumerate()
    {
        let tol = if method == Method::Gph { 0.1 } else { 0.05 };
        for (hi, h) in [0.6, 0.7, 0.8].into_iter().enumerate() {
            let v = mean_h(
                h,
                method,
                false,
                derive_seed(SEED, (40 + 3 * mi + hi) as u64),
            );
            let m = stats::mean(&v);
            pass &= (m - h).abs() <= tol;
            parts.push(format!("{}@{h}={m:.3}", method.tag()));
            out.push(v);
        }
    }
    Outcome {
        pass,
        detail: parts.join(" "),
        output: serde_json::to_string(&out).unwrap(),
    }
}

fn c5_rank2_collapse() -> Outcome {
    let a = mean_h(0.7, Method::LocalWhittle, true, derive_seed(SEED, 51));
    let b = mean_h(0.9, Method::LocalWhittle, true, derive_seed(SEED, 52));
    let (ma, mb) = (stats::mean(&a), stats::mean(&b));
    Outcome {
        pass: (ma - 0.5).abs() <= 0.07 && (mb - 0.8).abs() <= 0.07,
        detail: format!("H=0.7 -> {ma:.4} (target 0.5), H=0.9 -> {mb:.4} (target 0.8)"),
        output: serde_json::to_string(&(a, b)).unwrap(),
    }
}

fn study_dataset(perturb: bool, seed: u64) -> Vec<DatasetEntry> {
    let hs = [0.65, 0.75, 0.85];
    (0..60)
        .map(|i| {
            let h = hs[i % 3];
            let y = FgnSpec::new(h, 2048)
                .sampler()
                .unwrap()
                .sample(derive_seed(seed, i as u64));
            let values = if perturb {
                y.iter().map(|v| v + 0.3 * (v * v - 1.0)).collect()
            } else {
                y
            };
            DatasetEntry {
                id: format!("series-{i:02}"),
                values,
            }
        })
        .collect()
}

fn study_config(seed: u64, contrast: bool) -> StudyConfig {
    StudyConfig {
        replicates: 200,
        estimator: Method::LocalWhittle,
        master_seed: seed,
        contrast_group: contrast,
        ..StudyConfig::default()
    }
}

fn c6_study_null() -> Outcome {
    let data = study_dataset(false, derive_seed(SEED, 61));
    let report = run_study_report(&data, &study_config(derive_seed(SEED, 62), false)).unwrap();
    let ps: Vec<f64> = report.records.iter().map(|r| r.p).collect();
    let med = median(&ps);
    let ks = ks_uniform(&ps);
    Outcome {
        pass: (0.35..=0.65).contains(&med) && ks.p_value > 0.01,
        detail: format!(
            "{} series kept, median P {med:.3}, KS D {:.3} p {:.3}",
            ps.len(),
            ks.statistic,
            ks.p_value
        ),
        output: serde_json::to_string(&report).unwrap(),
    }
}

fn c7_study_perturbed() -> Outcome {
    let data = study_dataset(true, derive_seed(SEED, 71));
    let report = run_study_report(&data, &study_config(derive_seed(SEED, 72), true)).unwrap();
    let contrast = report.contrast.as_ref().unwrap();
    let med_p = report.summary.median_p;
    let (d, dc) = (report.summary.median_delta, contrast.summary.median_delta);
    Outcome {
        pass: med_p > 0.7 && d > dc,
        detail: format!(
            "{} series kept, median P {med_p:.3} (contrast {:.3}), median delta {d:.4} vs contrast {dc:.4}",
            report.records.len(),
            contrast.summary.median_p
        ),
        output: serde_json::to_string(&report).unwrap(),
    }
}

fn c8_sample_variance() -> Outcome {
    let grid = dyadic_grid(512, 8192);
    let pert = t("poly:-0.5,1,0.5");
    let runs = [
        (0.65, None, -0.5),
        (0.85, None, -0.3),
        (0.85, Some(&pert), -0.15),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut out = Vec::new();
    for (i, (h, f, want)) in runs.into_iter().enumerate() {
        let r =
            sample_variance_experiment(h, f, &grid, 500, derive_seed(SEED, 80 + i as u64)).unwrap();
        pass &= (r.fitted_exponent - want).abs() <= 0.07;
        parts.push(format!(
            "H={h} {}: {:.4} (target {want})",
            if f.is_some() { "perturbed" } else { "identity" },
            r.fitted_exponent
        ));
        out.push(r);
    }
    Outcome {
        pass,
        detail: parts.join(", "),
        output: serde_json::to_string(&out).unwrap(),
    }
}

fn c9_whittle_rate() -> Outcome {
    let grid = dyadic_grid(1024, 16384);
    let plain = whittle_rate_experiment(0.8, None, &grid, 300, derive_seed(SEED, 91)).unwrap();
    let pert = t("poly:0,1,0.5,-0.15");
    let bent =
        whittle_rate_experiment(0.8, Some(&pert), &grid, 300, derive_seed(SEED, 92)).unwrap();
    let rho1 = bent.rho1.as_ref().unwrap();
    let (a, b) = (plain.scaling.fitted_exponent, bent.scaling.fitted_exponent);
    Outcome {
        pass: (a + 0.5).abs() <= 0.1 && (b + 0.2).abs() <= 0.1 && bent.perturbed,
        detail: format!(
            "Gaussian {a:.4} (target -0.5), perturbed {b:.4} (target -0.2), rho_1 {:.4} vs bound {:.2e}, pseudo-true d {:.4}",
            rho1.value, rho1.truncation_bound, bent.pseudo_true_d
        ),
        output: serde_json::to_string(&(plain, bent)).unwrap(),
    }
}

fn c10_empirical_process() -> Outcome {
    let grid = [0.0, 1.0];
    let lrd = empirical_process_experiment(
        0.9,
        &TransformSpec::Identity,
        &grid,
        0.0,
        4096,
        500,
        false,
        derive_seed(SEED, 101),
    )
    .unwrap();
    let iid = empirical_process_experiment(
        0.9,
        &TransformSpec::Identity,
        &grid,
        0.0,
        4096,
        500,
        true,
        derive_seed(SEED, 102),
    )
    .unwrap();
    let corr = lrd.cross_correlations[0][1];
    let j1 = lrd.j1_estimates[0];
    let (ci, bi) = (iid.cross_correlations[0][1], iid.bridge_correlations[0][1]);
    Outcome {
        pass: corr.abs() > 0.9 && (j1 + normal_pdf(0.0)).abs() <= 0.01 && (ci - bi).abs() <= 0.1,
        detail: format!(
            "|Corr| {:.4}, J1(0) {j1:.5} (target {:.5}), iid Corr {ci:.4} vs bridge {bi:.4}",
            corr.abs(),
            -normal_pdf(0.0)
        ),
        output: serde_json::to_string(&(lrd, iid)).unwrap(),
    }
}

fn c11_clt() -> Outcome {
    let r = clt_stability_experiment(
        &WeakDepSpec::ar1(0.5),
        &t("clip:2:abs"),
        4096,
        1000,
        derive_seed(SEED, 111),
    )
    .unwrap();
    Outcome {
        pass: r.ks_distance < 0.05,
        detail: format!(
            "KS {:.4}, skew {:.3}, excess kurtosis {:.3}",
            r.ks_distance, r.skewness, r.excess_kurtosis
        ),
        output: serde_json::to_string(&r).unwrap(),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    ("1 Hermite algebra", c1_hermite_algebra),
    ("2 rank table", c2_rank_table),
    ("3 transform covariance law", c3_covariance_law),
    ("4 estimator calibration", c4_calibration),
    ("5 rank-2 collapse", c5_rank2_collapse),
    ("6 study null uniformity", c6_study_null),
    ("7 study skew under perturbation", c7_study_perturbed),
    ("8 sample-variance dichotomy", c8_sample_variance),
    ("9 Whittle rate collapse", c9_whittle_rate),
    ("10 empirical-process degeneracy", c10_empirical_process),
    ("11 CLT stability", c11_clt),
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut first = Vec::new();
    for (name, run) in CRITERIA {
        let start = Instant::now();
        let o = run();
        println!(
            "[{}] criterion {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(name);
        }
        first.push(o.output);
    }
    let start = Instant::now();
    let mut differing = Vec::new();
    for (i, (name, run)) in CRITERIA.iter().enumerate().skip(2) {
        if run().output != first[i] {
            differing.push(*name);
        }
    }
    let pass = differing.is_empty();
    println!(
        "[{}] criterion 12 determinism: criteria 3-11 rerun with identical seeds, differing outputs: {differing:?} ({:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    if !pass {
        failed.push("12 determinism");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
