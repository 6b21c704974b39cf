use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Machine-readable result of one command. Serializes with sorted keys.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub tolerances: Value,
    pub wall_clock: f64,
}

pub fn value<T: Serialize>(x: T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("inputs".into(), self.inputs.clone());
        m.insert("results".into(), Value::Object(self.results.clone()));
        m.insert("residuals".into(), Value::Object(self.residuals.clone()));
        m.insert("tolerances".into(), self.tolerances.clone());
        m.insert("wall_clock".into(), value(self.wall_clock));
        m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        // serde_json maps are ordered by key, so nested objects are sorted too
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })
    }
}
