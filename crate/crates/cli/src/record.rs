//! Result records: the machine-readable output unit, one per line.
//! Numeric fields are exact rational strings or `"inf"`, never binary
//! floats.

use serde::Serialize;
use wtsdist_core::{DistanceValue, ExtValue};

#[derive(Serialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(String),
    Interval { lower: String, upper: String },
}

impl Value {
    pub fn scalar(v: &ExtValue) -> Self {
        Value::Scalar(v.to_string())
    }

    pub fn interval(lower: &ExtValue, upper: &ExtValue) -> Self {
        Value::Interval {
            lower: lower.to_string(),
            upper: upper.to_string(),
        }
    }

    pub fn from_distance(v: &DistanceValue) -> Self {
        match v {
            DistanceValue::Exact(v) => Value::scalar(v),
            DistanceValue::Interval { lower, upper } => Value::interval(lower, upper),
        }
    }
}

#[derive(Serialize)]
pub struct Record {
    pub command: &'static str,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blind: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl Record {
    pub fn new(command: &'static str) -> Self {
        Record {
            command,
            status: "EXACT".to_string(),
            metric: None,
            file: None,
            from: None,
            to: None,
            value: None,
            iterations: None,
            depth: None,
            blind: None,
            message: None,
            wall_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn to_table(&self) -> String {
        let mut lines = vec![
            format!("command     {}", self.command),
            format!("status      {}", self.status),
        ];
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                lines.push(format!("{key:<11} {v}"));
            }
        };
        push("metric", self.metric.clone());
        push("file", self.file.clone());
        push("from", self.from.clone());
        push("to", self.to.clone());
        push(
            "value",
            self.value.as_ref().map(|v| match v {
                Value::Scalar(s) => s.clone(),
                Value::Interval { lower, upper } => format!("[{lower}, {upper}]"),
            }),
        );
        push("iterations", self.iterations.map(|i| i.to_string()));
        push("depth", self.depth.map(|d| d.to_string()));
        push("blind", self.blind.map(|b| b.to_string()));
        push("message", self.message.clone());
        push("wall_ms", self.wall_ms.map(|w| w.to_string()));
        lines.join("\n")
    }
}
