use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use lrdlab::LrdError;

use crate::args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(LrdError),
}

impl From<LrdError> for CliError {
    fn from(e: LrdError) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    /// 2 usage, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                LrdError::Input(_) | LrdError::Domain(_) => 2,
                LrdError::Parse(_)
                | LrdError::Io(_)
                | LrdError::DegenerateInput(_)
                | LrdError::Study(_) => 3,
                LrdError::Integrability(_)
                | LrdError::DegenerateTransform(_)
                | LrdError::Embedding(_)
                | LrdError::Numeric(_) => 4,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Lib(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": { "kind": kind, "message": message, "exit_code": self.exit_code() } })
            .to_string()
    }
}

fn config_error(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config {path}: {msg}"))
}

/// Expands `--config <json>` into flags appended after the command line, so
/// that config entries win over flags given on the command line.
pub fn apply_config(raw: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        if a == "--config" {
            path = raw.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(raw) };
    let text = std::fs::read_to_string(&path).map_err(|e| config_error(&path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| config_error(&path, e))?;
    let Value::Object(map) = value else {
        return Err(config_error(&path, "expected a JSON object"));
    };
    let mut argv = raw;
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let flag = if flag == "--r" {
            "--R".to_string()
        } else {
            flag
        };
        match v {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(scalar)
                    .collect::<Result<_, _>>()
                    .map_err(|e| config_error(&path, e))?;
                argv.push(format!("{flag}={}", parts.join(",")));
            }
            other => argv.push(format!(
                "{flag}={}",
                scalar(&other).map_err(|e| config_error(&path, e))?
            )),
        }
    }
    Ok(argv)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub subcommand: String,
    pub flags: Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub timestamps: Timestamps,
    pub outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Manifest {
    pub fn start(cli: &Cli) -> Self {
        let (flags, seed) = match &cli.command {
            Command::Simulate(a) => (serde_json::to_value(a), Some(a.seed)),
            Command::Transform(a) => (serde_json::to_value(a), None),
            Command::Estimate(a) => (serde_json::to_value(a), None),
            Command::Rank(a) => (serde_json::to_value(a), None),
            Command::Study(a) => (serde_json::to_value(a), Some(a.seed)),
            Command::Lab(a) => (serde_json::to_value(a), Some(a.seed)),
        };
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: cli.command.name().to_string(),
            flags: flags.unwrap_or(Value::Null),
            seed,
            threads: rayon::current_num_threads(),
            timestamps: Timestamps {
                started: now(),
                finished: None,
            },
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, outputs: Vec<PathBuf>) {
        self.timestamps.finished = Some(now());
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| LrdError::Io(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| LrdError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Creates `dir` and all parents.
pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| LrdError::Io(format!("{}: {e}", dir.display())))?;
    Ok(())
}
