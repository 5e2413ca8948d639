use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use coreset_core::io::{read_any, write_binary, write_csv};
use coreset_core::WeightedDataset;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::{Format, GlobalArgs};
use crate::CliError;

pub const SCHEMA: &str = "coreset-report/1";
pub const GIT_DESCRIBE: &str = env!("CORESET_GIT_DESCRIBE");

/// Hex SHA-256 of the canonical (key-sorted) JSON encoding of `config`.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Report {
    command: &'static str,
    seed: u64,
    config: Value,
    result: Map<String, Value>,
    timing: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        Self { command, seed, config, result: Map::new(), timing: Map::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.result.insert(key.to_owned(), value.into());
    }

    pub fn set_json<T: serde::Serialize>(&mut self, key: &str, value: &T) -> Result<(), CliError> {
        self.result.insert(key.to_owned(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn time(&mut self, key: &str, seconds: f64) {
        self.timing.insert(key.to_owned(), json!(seconds));
    }

    pub fn to_value(&self, with_timing: bool) -> Value {
        let mut out = json!({
            "schema": SCHEMA,
            "command": self.command,
            "provenance": {
                "git_describe": GIT_DESCRIBE,
                "seed": self.seed,
                "config_hash": config_hash(&self.config),
            },
            "config": self.config,
            "result": self.result,
        });
        if with_timing {
            out["timing"] = Value::Object(self.timing.clone());
        }
        out
    }
}

pub fn open_input(path: &Path) -> Result<Box<dyn io::BufRead>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn read_dataset(path: &Path) -> Result<WeightedDataset, CliError> {
    Ok(read_any(open_input(path)?)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn data_format(global: &GlobalArgs) -> Format {
    global.format.unwrap_or_else(|| match global.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("bin") => Format::Bin,
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

fn encode_dataset(
    data: &WeightedDataset,
    sources: Option<&[usize]>,
    with_weights: bool,
    format: Format,
    mut out: impl Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(data, with_weights, &mut out)?,
        Format::Bin => write_binary(data, with_weights, &mut out)?,
        Format::Json => {
            let mut v = json!({
                "dim": data.dim(),
                "points": data.rows().collect::<Vec<_>>(),
            });
            if with_weights {
                v["weights"] = json!(data.weights());
            }
            if let Some(s) = sources {
                v["source_indices"] = json!(s);
            }
            serde_json::to_writer(&mut out, &v)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the data artifact to `--out`, or stdout when unset.
pub fn emit_dataset(
    global: &GlobalArgs,
    data: &WeightedDataset,
    sources: Option<&[usize]>,
    with_weights: bool,
) -> Result<(), CliError> {
    let format = data_format(global);
    match &global.out {
        Some(path) => encode_dataset(data, sources, with_weights, format, create(path)?),
        None => encode_dataset(data, sources, with_weights, format, io::stdout().lock()),
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the report to `--report`, else next to `--out`, else stdout unless
/// stdout already carries the data artifact.
pub fn emit_report(global: &GlobalArgs, report: &Report, data_on_stdout: bool) -> Result<(), CliError> {
    let target = match (&global.report, &global.out) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(out)) => Some(sidecar(out)),
        (None, None) if data_on_stdout => return Ok(()),
        (None, None) => None,
    };
    let value = report.to_value(global.timing);
    let write = |mut w: Box<dyn Write>| -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, &value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    };
    match target {
        Some(p) => write(Box::new(create(&p)?)),
        None => write(Box::new(io::stdout().lock())),
    }
}
