use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

/// Machine-readable outcome of one subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Map<String, Value>,
    pub max_errors: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: Map::new(),
            results: Map::new(),
            max_errors: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), to_value(value));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(key.to_string(), to_value(value));
        self
    }

    /// Registers a check; it passes when `value <= threshold`.
    pub fn check(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.max_errors.insert(name.to_string(), value);
        self.thresholds.insert(name.to_string(), threshold);
        self.pass &= value <= threshold;
        self
    }

    /// Marks the run failed with a message, e.g. on a violated precondition.
    pub fn fail(&mut self, message: String) -> &mut Self {
        self.results.insert("error".into(), Value::String(message));
        self.pass = false;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report value serializes")
}
