//! JSON config files merged under command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::exit::CliError;

pub const SEED_ENV: &str = "NEUROSIM_SEED";

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::config(format!("config {} must be a JSON object", path.display()))),
        Err(e) => Err(CliError::config(format!("config {}: {e}", path.display()))),
    }
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// Overlays the flags that were given onto the config file, then
/// deserializes the result. Unset flags (absent options, false switches,
/// empty lists) leave the config value in place.
pub fn resolve<A: Serialize, R: DeserializeOwned>(flags: &A, config: Option<&Path>) -> Result<R, CliError> {
    let mut merged = match config {
        Some(path) => read_config(path)?,
        None => Map::new(),
    };
    match serde_json::to_value(flags).expect("flags serialize") {
        Value::Object(given) => merged.extend(given.into_iter().filter(|(_, v)| !is_unset(v))),
        _ => unreachable!("flag structs serialize as objects"),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
}

/// Seed from the merged config, else `NEUROSIM_SEED`, else 0.
pub fn seed_or_env(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// Fails unless `path` exists.
pub fn require_input(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::config(format!("{what} {} does not exist", path.display())))
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

/// Writes the effective configuration as `run.json` in `dir`.
pub fn write_run_json<R: Serialize>(dir: &Path, command: &str, resolved: &R) -> Result<PathBuf, CliError> {
    let mut obj = Map::new();
    obj.insert("command".into(), Value::String(command.into()));
    obj.insert("config".into(), serde_json::to_value(resolved).expect("config serializes"));
    let path = dir.join("run.json");
    let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
    text.push('\n');
    write_file(&path, text)?;
    Ok(path)
}
