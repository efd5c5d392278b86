//! Result files: the computed result plus the configuration that produced
//! it, a hash of the inputs and a timestamp.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use coarsecoh::io::{read_text, to_json, write_json, write_text};

use crate::args::Command;
use crate::run::run;
use crate::CliError;

/// Excluded when comparing a replay with the original.
pub const TIMESTAMP_FIELD: &str = "timestamp";

pub struct Envelope {
    pub value: Value,
    pub tsv: Option<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn wrap(config: &Command, input_hash: String, result: Value) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    m.insert("input_hash".into(), Value::from(input_hash));
    m.insert(TIMESTAMP_FIELD.into(), Value::from(now()));
    match result {
        Value::Object(r) => m.extend(r),
        other => {
            m.insert("result".into(), other);
        }
    }
    Value::Object(m)
}

pub fn execute(cmd: &Command) -> Result<Envelope, CliError> {
    let out = run(cmd)?;
    Ok(Envelope { value: wrap(cmd, sha256_hex(&out.inputs), out.result), tsv: out.tsv })
}

/// The JSON text of a result with the timestamp removed.
pub fn canonical(v: &Value) -> String {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.remove(TIMESTAMP_FIELD);
    }
    to_json(&v).expect("values serialize")
}

/// Re-runs the config stored in `file` and checks that the new result is
/// identical apart from the timestamp.
pub fn replay(file: &Path) -> Result<Envelope, CliError> {
    let text = read_text(file)?;
    let stored: Value = serde_json::from_str(&text).map_err(|e| coarsecoh::Error::Parse(e.to_string()))?;
    let config = stored
        .get("config")
        .ok_or_else(|| CliError::Usage(format!("{} has no config block", file.display())))?;
    let cmd: Command = serde_json::from_value(config.clone())
        .map_err(|e| CliError::Usage(format!("config in {} is not valid: {e}", file.display())))?;
    if matches!(cmd, Command::Replay { .. }) {
        return Err(CliError::Usage("cannot replay a replay report".into()));
    }
    let fresh = execute(&cmd)?;
    if canonical(&fresh.value) != canonical(&stored) {
        let differing: Vec<String> = match (&fresh.value, &stored) {
            (Value::Object(a), Value::Object(b)) => a
                .keys()
                .chain(b.keys())
                .filter(|k| k.as_str() != TIMESTAMP_FIELD && a.get(*k) != b.get(*k))
                .cloned()
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect(),
            _ => vec!["<root>".into()],
        };
        return Err(CliError::Mismatch(format!("fields differ: {}", differing.join(", "))));
    }
    let report = serde_json::json!({
        "identical": true,
        "replayed_subcommand": config.get("subcommand").cloned().unwrap_or(Value::Null),
        "replayed_input_hash": stored.get("input_hash").cloned().unwrap_or(Value::Null),
    });
    let replay_cmd = Command::Replay { file: file.to_path_buf() };
    Ok(Envelope { value: wrap(&replay_cmd, sha256_hex(text.as_bytes()), report), tsv: None })
}

/// Writes the JSON to `out` (and the TSV next to it), or the JSON to stdout.
pub fn emit(env: &Envelope, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_json(path, &env.value)?;
            if let Some(tsv) = &env.tsv {
                write_text(&path.with_extension("tsv"), tsv)?;
            }
        }
        None => print!("{}", to_json(&env.value)?),
    }
    Ok(())
}
