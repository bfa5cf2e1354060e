//! Output handling shared by all commands: atomic writes, line-delimited
//! records, and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Writer that lands atomically: content goes to `<path>.tmp` and is
/// renamed into place on success; failures leave no partial output.
pub struct AtomicOutput {
    tmp: PathBuf,
    path: PathBuf,
    file: Option<std::io::BufWriter<fs::File>>,
}

impl AtomicOutput {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let tmp = path.with_extension("tmp");
        let file = fs::File::create(&tmp)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", tmp.display())))?;
        Ok(AtomicOutput {
            tmp,
            path: path.to_path_buf(),
            file: Some(std::io::BufWriter::new(file)),
        })
    }

    pub fn write_line(&mut self, line: &str) -> Result<(), CliError> {
        let f = self.file.as_mut().expect("output still open");
        writeln!(f, "{line}").map_err(|e| CliError::data(format!("write failed: {e}")))
    }

    pub fn write_json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(value)
            .map_err(|e| CliError::data(format!("serialization failed: {e}")))?;
        self.write_line(&line)
    }

    pub fn commit(mut self) -> Result<(), CliError> {
        let f = self.file.take().expect("output still open");
        f.into_inner()
            .map_err(|e| CliError::data(format!("flush failed: {e}")))?
            .sync_all()
            .ok();
        fs::rename(&self.tmp, &self.path)
            .map_err(|e| CliError::data(format!("cannot finalize {}: {e}", self.path.display())))
    }
}

impl Drop for AtomicOutput {
    fn drop(&mut self) {
        if self.file.is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

/// Run manifest written beside each command's output.
pub struct Manifest {
    command: String,
    inputs: Vec<String>,
    config: Value,
    counts: serde_json::Map<String, Value>,
    warnings: Vec<String>,
    seed: Option<u64>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            inputs: Vec::new(),
            config: json!({}),
            counts: serde_json::Map::new(),
            warnings: Vec::new(),
            seed: None,
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn config<T: Serialize>(mut self, config: &T) -> Self {
        self.config = serde_json::to_value(config).unwrap_or(json!({}));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn count(&mut self, name: &str, value: usize) {
        self.counts.insert(name.to_string(), json!(value));
    }

    pub fn warn(&mut self, warning: impl Into<String>) {
        self.warnings.push(warning.into());
    }

    /// Write `<output>.manifest.json`.
    pub fn write_beside(&self, output: &Path) -> Result<(), CliError> {
        let path = manifest_path(output);
        let body = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs,
            "config": self.config,
            "seed": self.seed,
            "counts": Value::Object(self.counts.clone()),
            "warnings": self.warnings,
        });
        let text = serde_json::to_string_pretty(&body)
            .map_err(|e| CliError::data(format!("manifest serialization failed: {e}")))?;
        fs::write(&path, text + "\n")
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    name.push_str(".manifest.json");
    output.with_file_name(name)
}

/// Read a whole line-delimited JSON file into values of `T`, reporting the
/// first undecodable line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Stream a line-delimited file without materializing it: calls `f` with
/// the 1-based line number and the raw line, skipping blank lines.
pub fn stream_lines(
    path: &Path,
    mut f: impl FnMut(usize, &str) -> Result<(), CliError>,
) -> Result<(), CliError> {
    use std::io::BufRead;
    let file = fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        f(i + 1, &line)?;
    }
    Ok(())
}

/// Stream batches of parsed values for order-preserving parallel work.
pub fn stream_batches<T: serde::de::DeserializeOwned>(
    path: &Path,
    batch_size: usize,
    mut f: impl FnMut(Vec<T>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut batch: Vec<T> = Vec::with_capacity(batch_size);
    stream_lines(path, |lineno, line| {
        let value: T = serde_json::from_str(line)
            .map_err(|e| CliError::data(format!("{}:{lineno}: {e}", path.display())))?;
        batch.push(value);
        if batch.len() >= batch_size {
            f(std::mem::take(&mut batch))?;
        }
        Ok(())
    })?;
    if !batch.is_empty() {
        f(batch)?;
    }
    Ok(())
}
