//! Machine-readable run reports.
//!
//! Floats are rounded to 10 significant digits before serialisation so that
//! repeated runs produce byte-identical JSON.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 10 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// Number formatting used in CSV output: 10 significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    /// Dataset name or file path.
    pub source: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(source: impl Into<String>, content: &[u8]) -> Self {
        InputDigest { source: source.into(), sha256: hex::encode(Sha256::digest(content)) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub options: Value,
    pub input: Option<InputDigest>,
    pub results: Value,
}

impl RunReport {
    pub fn new(command: &str, options: impl Serialize, input: Option<InputDigest>, results: impl Serialize) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            tool: "varadv".into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            options: round_value(serde_json::to_value(options).unwrap_or(Value::Null)),
            input,
            results: round_value(serde_json::to_value(results).unwrap_or(Value::Null)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn result(&self, pointer: &str) -> Option<&Value> {
        self.results.pointer(pointer)
    }
}

/// Ordered object builder for ad-hoc result maps.
#[derive(Default)]
pub struct Fields(Map<String, Value>);

impl Fields {
    pub fn new() -> Self {
        Fields(Map::new())
    }

    pub fn with(mut self, key: &str, v: impl Serialize) -> Self {
        self.0.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}
