//! The JSON report shared by the analysis subcommands.

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::codec::Num;

/// A local value that may be undefined; serialized as a number or `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaybeNum(pub Option<f64>);

impl Serialize for MaybeNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(x) => Num(x).serialize(s),
            None => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(role: &'static str, path: &str, bytes: &[u8]) -> Self {
        Self { role, path: path.to_owned(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

/// Matrix with its state labels, for embedding derived matrices in reports.
#[derive(Debug, Clone, Serialize)]
pub struct LabelledMatrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<Num>>,
}

impl LabelledMatrix {
    pub fn new(w: &flicker_core::TransitionMatrix<f64>) -> Self {
        Self { labels: w.labels().to_vec(), rows: w.rows().map(|r| r.iter().map(|&x| Num(x)).collect()).collect() }
    }
}

/// Deterministic: identical inputs and flags give byte-identical output.
#[derive(Debug, Clone, Serialize)]
pub struct EmergenceReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub analysis: &'static str,
    pub inputs: Vec<InputDigest>,
    pub settings: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub expected: serde_json::Value,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub local: serde_json::Value,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub statistics: serde_json::Value,
    pub warnings: Vec<String>,
}

impl EmergenceReport {
    pub fn new(analysis: &'static str) -> Self {
        Self {
            tool: "flicker",
            version: env!("CARGO_PKG_VERSION"),
            analysis,
            inputs: Vec::new(),
            settings: serde_json::Map::new(),
            expected: serde_json::Value::Null,
            local: serde_json::Value::Null,
            statistics: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.settings.insert(key.to_owned(), value.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report section serializes")
}
