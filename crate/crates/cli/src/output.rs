//! Resolved run configuration and the JSON/CSV writers.

use crate::{Common, Failure, Format};
use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

/// Everything that determines the output of one run.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub subcommand: String,
    pub p: Option<usize>,
    pub n_max: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "N")]
    pub ladder: Vec<usize>,
    pub trials: Option<usize>,
    pub t: Option<String>,
    pub tau: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub cache_dir: Option<String>,
    pub format: Format,
    /// Subcommand-specific settings.
    pub details: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(subcommand: &str, common: &Common) -> Self {
        RunConfig {
            subcommand: subcommand.into(),
            p: None,
            n_max: None,
            k: None,
            ladder: Vec::new(),
            trials: None,
            t: None,
            tau: None,
            seed: None,
            output: common.out.as_ref().map(|p| p.display().to_string()),
            cache_dir: common.cache_dir.as_ref().map(|p| p.display().to_string()),
            format: common.format,
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, v: impl Serialize) -> Self {
        self.details.insert(key.into(), serde_json::to_value(v).expect("serializable detail"));
        self
    }
}

/// Tabular and structured views of one result.
pub struct Artifact {
    pub json: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn new(header: &[&'static str]) -> Self {
        Artifact { json: Map::new(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.json.insert(key.into(), serde_json::to_value(v).expect("serializable field"));
    }

    pub fn row(&mut self, r: Vec<String>) {
        self.rows.push(r);
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn render_csv(a: &Artifact) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Check(format!("csv: {e}"));
    w.write_record(&a.header).map_err(io)?;
    for r in &a.rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Check(format!("csv: {e}")))
}

/// Writes the artifact in the requested format. CSV runs keep their
/// config in a `.config.json` sidecar (or on stderr when printing).
pub fn emit(common: &Common, cfg: &RunConfig, a: Artifact) -> Result<(), Failure> {
    let cfg_json = serde_json::to_value(cfg).expect("serializable config");
    let bytes = match common.format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("config".into(), cfg_json.clone());
            obj.extend(a.json.clone());
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable output");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => render_csv(&a)?,
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            if common.format == Format::Csv {
                let mut s = serde_json::to_string_pretty(&cfg_json).expect("serializable config");
                s.push('\n');
                std::fs::write(sidecar(path, ".config.json"), s)?;
            }
        }
        None => {
            if common.format == Format::Csv {
                eprintln!("config: {cfg_json}");
            }
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Timestamps for a run written to `out`; kept apart so outputs stay byte-identical.
pub fn write_log(out: &Path, started: SystemTime, code: u8) -> std::io::Result<()> {
    let secs = |t: SystemTime| t.duration_since(SystemTime::UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let finished = SystemTime::now();
    let text = format!("started_unix={:.3}\nfinished_unix={:.3}\nexit_code={code}\n", secs(started), secs(finished));
    std::fs::write(sidecar(out, ".log"), text)
}
