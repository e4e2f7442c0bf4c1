//! Sample paths and their plain-text file format.
//!
//! Files hold one value per line, optionally preceded by `# key: value`
//! header comments. CSV files with an `index,value` header are accepted on
//! input. Values are written with 17 significant digits so that a write/read
//! cycle reproduces every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    /// Generator description, transform chain, or file origin.
    pub generator: String,
    pub seed: Option<u64>,
    /// Free-form header entries.
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl TimeSeries {
    /// Builds a series, rejecting empty or non-finite data.
    pub fn new(values: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(LrdError::Input(
                "series must have at least one value".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LrdError::Input(format!("non-finite value at index {i}")));
        }
        Ok(TimeSeries { values, meta })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, SeriesMeta::default())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Serializes to the plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 25 + 64);
        if !self.meta.generator.is_empty() {
            let _ = writeln!(out, "# generator: {}", self.meta.generator);
        }
        if let Some(seed) = self.meta.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        for (k, v) in &self.meta.extra {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for v in &self.values {
            let _ = writeln!(out, "{}", format_f64(*v));
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// 17 significant digits in scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// What happened while parsing a series file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub comment_lines: usize,
    pub blank_lines: usize,
    pub header_skipped: bool,
    pub missing_values: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub path: String,
    pub series: TimeSeries,
    pub diagnostics: ParseDiagnostics,
}

const MISSING_TOKENS: [&str; 6] = ["na", "nan", "null", "none", "missing", "?"];

fn is_missing(token: &str) -> bool {
    token.is_empty() || MISSING_TOKENS.contains(&token.to_ascii_lowercase().as_str())
}

/// Parses the text format. Any missing or non-numeric entry rejects the
/// whole file.
pub fn parse_series(text: &str, origin: &str) -> Result<(TimeSeries, ParseDiagnostics)> {
    let mut diag = ParseDiagnostics::default();
    let mut meta = SeriesMeta {
        generator: String::new(),
        seed: None,
        extra: BTreeMap::new(),
    };
    let mut values = Vec::new();
    let mut csv: Option<bool> = None;
    let mut missing_at = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            diag.blank_lines += 1;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            diag.comment_lines += 1;
            if let Some((k, v)) = comment.split_once(':') {
                let (k, v) = (k.trim(), v.trim());
                match k {
                    "generator" => meta.generator = v.to_string(),
                    "seed" => meta.seed = v.parse().ok(),
                    _ => {
                        meta.extra.insert(k.to_string(), v.to_string());
                    }
                }
            }
            continue;
        }
        if csv.is_none() {
            let lower = line.to_ascii_lowercase().replace(' ', "");
            if lower == "index,value" {
                csv = Some(true);
                diag.header_skipped = true;
                continue;
            }
            csv = Some(line.contains(','));
        }
        let token = if csv == Some(true) {
            let mut fields = line.split(',');
            let _index = fields.next();
            let value = fields.next().map(str::trim).unwrap_or("");
            if fields.next().is_some() {
                return Err(LrdError::Parse(format!(
                    "{origin}:{}: expected two CSV columns",
                    lineno + 1
                )));
            }
            value
        } else {
            line
        };
        if is_missing(token) {
            diag.missing_values += 1;
            missing_at.push(lineno + 1);
            continue;
        }
        let v: f64 = token.parse().map_err(|_| {
            LrdError::Parse(format!(
                "{origin}:{}: non-numeric token {token:?}",
                lineno + 1
            ))
        })?;
        if !v.is_finite() {
            return Err(LrdError::Parse(format!(
                "{origin}:{}: non-finite value",
                lineno + 1
            )));
        }
        values.push(v);
    }
    if diag.missing_values > 0 {
        return Err(LrdError::Parse(format!(
            "{origin}: {} missing value(s), first at line {}",
            diag.missing_values, missing_at[0]
        )));
    }
    if values.is_empty() {
        return Err(LrdError::Parse(format!("{origin}: empty series")));
    }
    if meta.generator.is_empty() {
        meta.generator = format!("file:{origin}");
    }
    Ok((TimeSeries::new(values, meta)?, diag))
}

/// Reads and parses a series file.
pub fn ingest(path: &Path) -> Result<SeriesFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LrdError::Io(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    let (series, diagnostics) = parse_series(&text, &origin)?;
    Ok(SeriesFile {
        path: origin,
        series,
        diagnostics,
    })
}
