//! JSON report envelope shared by every command.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use warpgraph::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Keys present in every report, in order.
pub const REPORT_KEYS: [&str; 8] = [
    "schema_version",
    "command",
    "status",
    "exit_code",
    "config",
    "result",
    "error",
    "timing",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InvalidInput,
    NotConverged,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InvalidInput => 2,
            Status::NotConverged => 3,
            Status::CheckFailed => 4,
        }
    }
}

/// Exit status for an error raised by the library.
pub fn error_status(e: &Error) -> Status {
    match e {
        Error::BlowUp { .. } | Error::LinearSolve(_) | Error::SingularMetric { .. } => {
            Status::NotConverged
        }
        _ => Status::InvalidInput,
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub result: Value,
    /// Seconds spent in solvers; kept apart so `result` is reproducible.
    pub wall_time: f64,
}

pub fn envelope(
    command: &str,
    config: Value,
    status: Status,
    result: Value,
    error: Option<String>,
    wall_time: f64,
) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": status,
        "exit_code": status.exit_code(),
        "config": config,
        "result": result,
        "error": error,
        "timing": { "wall_time": wall_time },
    })
}

pub fn write_report(dir: &Path, command: &str, report: &Value) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{command}.json"));
    let mut text = serde_json::to_string_pretty(report).expect("reports are plain JSON");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Serialize and move any `wall_time` entries out of the result.
pub fn strip_wall_time<T: Serialize>(v: &T) -> (Value, f64) {
    let mut value = serde_json::to_value(v).expect("reports are plain JSON");
    let mut total = 0.0;
    strip(&mut value, &mut total);
    (value, total)
}

fn strip(v: &mut Value, total: &mut f64) {
    match v {
        Value::Object(map) => {
            if let Some(t) = map.remove("wall_time") {
                *total += t.as_f64().unwrap_or(0.0);
            }
            map.values_mut().for_each(|x| strip(x, total));
        }
        Value::Array(xs) => xs.iter_mut().for_each(|x| strip(x, total)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_has_the_documented_keys() {
        let r = envelope("solve", json!({}), Status::Ok, json!(null), None, 0.5);
        let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
        let mut want = REPORT_KEYS.to_vec();
        want.sort();
        assert_eq!(keys, want);
    }

    #[test]
    fn wall_time_is_moved_out() {
        let (v, t) = strip_wall_time(&json!({"a": {"wall_time": 1.5, "b": 2}, "c": [{"wall_time": 0.5}]}));
        assert_eq!(v, json!({"a": {"b": 2}, "c": [{}]}));
        assert_eq!(t, 2.0);
    }
}
