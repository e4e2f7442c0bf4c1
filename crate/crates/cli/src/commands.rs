use std::path::{Path, PathBuf};

use lrdlab::estimators::{estimate, CSV_HEADER};
use lrdlab::hermite::{
    generalized_rank, hermite_rank, power_rank, shifted_rank, PowerRankOptions, DEFAULT_MAX_ORDER,
};
use lrdlab::lab::{self, dyadic_grid, ScalingReport, Statistic};
use lrdlab::process::{
    apply_transform, simulate_farima, simulate_fgn, simulate_linear, simulate_weak, FarimaSpec,
    FgnSpec, Innovation, LinearSpec, ProcessSpec, WeakDepSpec, WeakKind,
};
use lrdlab::series::{format_f64, ingest, TimeSeries};
use lrdlab::stats::five_number;
use lrdlab::study::{run_study_report, DatasetEntry, StudyConfig, StudyRecord, StudySummary};
use lrdlab::transform::TransformSpec;
use lrdlab::LrdError;

use crate::args::*;
use crate::output::{ensure_dir, write_json, write_text, CliError};

/// Files written by a command and the directory its manifest belongs in.
pub struct Outputs {
    pub files: Vec<PathBuf>,
    pub manifest_dir: Option<PathBuf>,
}

impl Outputs {
    fn none() -> Self {
        Outputs {
            files: Vec::new(),
            manifest_dir: None,
        }
    }

    /// A single output file; its manifest goes next to it.
    fn file(path: &Path) -> Self {
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Outputs {
            files: vec![path.to_path_buf()],
            manifest_dir: Some(dir),
        }
    }
}

pub fn dispatch(cmd: &Command) -> Result<Outputs, CliError> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Transform(a) => transform(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Rank(a) => rank(a),
        Command::Study(a) => study(a),
        Command::Lab(a) => lab_cmd(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("bad number {s:?} in {what}")))
}

fn parse_innovation(s: &str) -> Result<Innovation, CliError> {
    match s.split_once(':') {
        None if s == "gaussian" => Ok(Innovation::Gaussian),
        None if s == "exp" => Ok(Innovation::CenteredExponential),
        Some(("t", df)) => Ok(Innovation::StudentT {
            df: parse_f64(df, "innovation")?,
        }),
        _ => Err(usage(format!(
            "unknown innovation {s:?}; use gaussian, exp or t:DF"
        ))),
    }
}

fn parse_weak(s: &str, innovation: Innovation) -> Result<WeakDepSpec, CliError> {
    let kind = match s.split_once(':') {
        None if s == "iid" => WeakKind::Iid,
        Some(("ar1", phi)) => WeakKind::Ar1 {
            phi: parse_f64(phi, "weak model")?,
        },
        Some(("tanh-ar", phi)) => WeakKind::TanhAr {
            phi: parse_f64(phi, "weak model")?,
        },
        _ => {
            return Err(usage(format!(
                "unknown weak model {s:?}; use iid, ar1:PHI or tanh-ar:PHI"
            )))
        }
    };
    let spec = WeakDepSpec { kind, innovation };
    spec.validate()?;
    Ok(spec)
}

fn parse_process(s: &str, innovation: Innovation) -> Result<ProcessSpec, CliError> {
    match s.split_once(':') {
        Some(("fgn", h)) => Ok(ProcessSpec::Fgn {
            hurst: parse_f64(h, "process")?,
        }),
        Some(("farima", d)) => Ok(ProcessSpec::Farima {
            d: parse_f64(d, "process")?,
        }),
        Some(("linear", h)) => Ok(ProcessSpec::Linear(LinearSpec {
            hurst: parse_f64(h, "process")?,
            innovation,
            truncation: None,
        })),
        _ => Ok(ProcessSpec::Weak(parse_weak(s, innovation)?)),
    }
}

fn emit_series(series: &TimeSeries, out: &Option<PathBuf>) -> Result<Outputs, CliError> {
    match out {
        Some(path) => {
            series.write_to(path)?;
            Ok(Outputs::file(path))
        }
        None => {
            print!("{}", series.to_text());
            Ok(Outputs::none())
        }
    }
}

fn simulate(a: &SimulateArgs) -> Result<Outputs, CliError> {
    let innovation = parse_innovation(&a.innovation)?;
    let mut series = if let Some(h) = a.fgn {
        simulate_fgn(&FgnSpec::new(h, a.n), a.seed)?
    } else if let Some(d) = a.farima {
        simulate_farima(&FarimaSpec { d, n: a.n }, a.seed)?
    } else if let Some(h) = a.linear {
        let spec = LinearSpec {
            hurst: h,
            innovation,
            truncation: a.truncation,
        };
        simulate_linear(&spec, a.n, a.seed)?
    } else {
        let model = a.weak.as_deref().unwrap_or("iid");
        simulate_weak(&parse_weak(model, innovation)?, a.n, a.seed)?
    };
    if let Some(g) = &a.transform {
        series = apply_transform(&series, g)?;
    }
    emit_series(&series, &a.out)
}

fn transform(a: &TransformArgs) -> Result<Outputs, CliError> {
    let file = ingest(&a.input)?;
    let series = apply_transform(&file.series, &a.transform)?;
    emit_series(&series, &a.out)
}

fn estimate_cmd(a: &EstimateArgs) -> Result<Outputs, CliError> {
    let bandwidth = match a.bandwidth.as_str() {
        "auto" => None,
        s => Some(
            s.parse::<usize>()
                .map_err(|_| usage(format!("--bandwidth must be an integer or auto, got {s:?}")))?,
        ),
    };
    let file = ingest(&a.input)?;
    let result = estimate(file.series.as_slice(), a.method, bandwidth)?;
    let text = format!("{CSV_HEADER}\n{}\n", result.csv_line());
    print!("{text}");
    match &a.out {
        Some(path) => {
            write_text(path, &text)?;
            Ok(Outputs::file(path))
        }
        None => Ok(Outputs::none()),
    }
}

fn rank(a: &RankArgs) -> Result<Outputs, CliError> {
    let need_transform = || {
        a.transform.as_ref().ok_or_else(|| {
            usage(format!("rank --method {:?} needs --transform", a.method).to_lowercase())
        })
    };
    let report = match a.method {
        RankMethod::Hermite => hermite_rank(
            need_transform()?,
            a.tol,
            a.max_order.unwrap_or(DEFAULT_MAX_ORDER),
        )?,
        RankMethod::Shifted => {
            let z = a
                .shift
                .ok_or_else(|| usage("rank --method shifted needs --shift"))?;
            shifted_rank(
                need_transform()?,
                z,
                a.tol,
                a.max_order.unwrap_or(DEFAULT_MAX_ORDER),
            )?
        }
        RankMethod::Power => {
            let g = need_transform()?;
            let path = a
                .sample
                .as_ref()
                .ok_or_else(|| usage("rank --method power needs --sample"))?;
            let sample = ingest(path)?;
            let defaults = PowerRankOptions::default();
            let opts = PowerRankOptions {
                max_order: a.max_order.unwrap_or(defaults.max_order),
                threshold: a.threshold,
                ..defaults
            };
            power_rank(g, sample.series.as_slice(), opts)?
        }
        RankMethod::Generalized => {
            let (Some(x), Some(y)) = (&a.x, &a.y) else {
                return Err(usage("rank --method generalized needs --x and --y"));
            };
            let (x, y) = (ingest(x)?, ingest(y)?);
            generalized_rank(
                x.series.as_slice(),
                y.series.as_slice(),
                a.max_order.unwrap_or(4),
                a.max_lag,
                a.threshold,
            )?
        }
    };
    println!("rank,{}", report.rank);
    match &a.out {
        Some(path) => {
            write_json(path, &report)?;
            Ok(Outputs::file(path))
        }
        None => Ok(Outputs::none()),
    }
}

fn read_dataset(dir: &Path) -> Result<Vec<DatasetEntry>, CliError> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| LrdError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            !p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with('.'))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(LrdError::Input(format!("no series files in {}", dir.display())).into());
    }
    paths
        .iter()
        .map(|p| {
            let file = ingest(p)?;
            let id = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("series")
                .to_string();
            Ok(DatasetEntry {
                id,
                values: file.series.values,
            })
        })
        .collect()
}

fn records_csv(records: &[StudyRecord]) -> String {
    let mut out = String::from("id,N,H1,H2,delta,P\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.id,
            r.n,
            format_f64(r.h1),
            format_f64(r.h2),
            format_f64(r.delta),
            format_f64(r.p)
        ));
    }
    out
}

fn histogram_csv(summary: &StudySummary) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for b in &summary.histogram {
        out.push_str(&format!(
            "{},{},{}\n",
            format_f64(b.left),
            format_f64(b.right),
            b.count
        ));
    }
    out
}

fn boxplot_csv(records: &[StudyRecord]) -> String {
    let mut out = String::from("quantity,min,q1,median,q3,max\n");
    type Column = (&'static str, fn(&StudyRecord) -> f64);
    let columns: [Column; 4] = [
        ("H1", |r| r.h1),
        ("H2", |r| r.h2),
        ("delta", |r| r.delta),
        ("P", |r| r.p),
    ];
    for (name, get) in columns {
        let f = five_number(&records.iter().map(get).collect::<Vec<_>>());
        out.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            format_f64(f.min),
            format_f64(f.q1),
            format_f64(f.median),
            format_f64(f.q3),
            format_f64(f.max)
        ));
    }
    out
}

fn write_study(
    dir: &Path,
    records: &[StudyRecord],
    summary: &StudySummary,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let files = [
        ("records.csv", records_csv(records)),
        ("hist_P.csv", histogram_csv(summary)),
        ("boxplot.csv", boxplot_csv(records)),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        write_text(&p, &text)?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    write_json(&p, summary)?;
    written.push(p);
    Ok(written)
}

fn study(a: &StudyArgs) -> Result<Outputs, CliError> {
    let config = StudyConfig {
        replicates: a.replicates,
        h_window: (a.h_min, a.h_max),
        min_length: a.min_length,
        estimator: a.estimator,
        master_seed: a.seed,
        contrast_group: a.contrast_group,
    };
    config.validate()?;
    let dataset = read_dataset(&a.data_dir)?;
    let report = run_study_report(&dataset, &config)?;
    let mut files = write_study(&a.out, &report.records, &report.summary)?;
    if let Some(c) = &report.contrast {
        files.extend(write_study(
            &a.out.join("contrast"),
            &c.records,
            &c.summary,
        )?);
    }
    println!(
        "selected {} of {}, median delta {}, median P {}",
        report.summary.m_selected,
        report.summary.n_input,
        format_f64(report.summary.median_delta),
        format_f64(report.summary.median_p)
    );
    Ok(Outputs {
        files,
        manifest_dir: Some(a.out.clone()),
    })
}

fn lab_cmd(a: &LabArgs) -> Result<Outputs, CliError> {
    let innovation = parse_innovation(&a.innovation)?;
    let grid = |lo: usize, hi: usize| a.n_grid.clone().unwrap_or_else(|| dyadic_grid(lo, hi));
    let reps = |default: usize| a.replicates.unwrap_or(default);
    let g = a.transform.as_ref();
    let (report, curve): (serde_json::Value, Option<ScalingReport>) = match a.experiment {
        Experiment::Scaling => {
            let process = parse_process(&a.process, innovation)?;
            let statistic = match a.statistic {
                StatisticArg::Sum => Statistic::Sum,
                StatisticArg::Mean => Statistic::Mean,
            };
            let r = lab::scaling_exponent(
                &process,
                g,
                a.center,
                statistic,
                &grid(256, 8192),
                reps(200),
                a.seed,
            )?;
            (to_value(&r)?, Some(r))
        }
        Experiment::Samplevar => {
            let r =
                lab::sample_variance_experiment(a.hurst, g, &grid(512, 8192), reps(500), a.seed)?;
            (to_value(&r)?, Some(r))
        }
        Experiment::Whittlerate => {
            let r =
                lab::whittle_rate_experiment(a.hurst, g, &grid(1024, 16384), reps(300), a.seed)?;
            (to_value(&r)?, Some(r.scaling))
        }
        Experiment::Empirical => {
            let x_grid = a.x_grid.clone().unwrap_or_else(|| vec![0.0, 1.0]);
            let g = g.cloned().unwrap_or(TransformSpec::Identity);
            let r = lab::empirical_process_experiment(
                a.hurst,
                &g,
                &x_grid,
                a.x0,
                a.n.unwrap_or(4096),
                reps(500),
                a.iid,
                a.seed,
            )?;
            (to_value(&r)?, Some(r.scaling))
        }
        Experiment::Clt => {
            let spec = parse_weak(&a.weak, innovation)?;
            let f = g.cloned().unwrap_or(TransformSpec::Identity);
            let r =
                lab::clt_stability_experiment(&spec, &f, a.n.unwrap_or(4096), reps(1000), a.seed)?;
            (to_value(&r)?, None)
        }
        Experiment::Covariance => {
            let [lo, hi] = a.lags[..] else {
                return Err(usage("--lags takes two values, LO,HI"));
            };
            let f = g.cloned().unwrap_or(TransformSpec::Square);
            let r = lab::covariance_slope_experiment(
                a.hurst,
                &f,
                a.n.unwrap_or(1 << 15),
                (lo, hi),
                reps(50),
                a.seed,
            )?;
            (to_value(&r)?, None)
        }
    };
    ensure_dir(&a.out)?;
    let path = a.out.join("report.json");
    write_json(&path, &report)?;
    let mut files = vec![path];
    if let Some(c) = curve {
        let p = a.out.join("curve.csv");
        write_text(&p, &c.curve_csv())?;
        files.push(p);
        println!(
            "fitted exponent {} (95% CI {} to {})",
            format_f64(c.fitted_exponent),
            format_f64(c.exponent_ci.0),
            format_f64(c.exponent_ci.1)
        );
    }
    Ok(Outputs {
        files,
        manifest_dir: Some(a.out.clone()),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| LrdError::Numeric(e.to_string()).into())
}
