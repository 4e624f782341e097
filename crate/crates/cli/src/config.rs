//! JSON config files merged under command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Reads a config file; it must hold a JSON object.
pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
        Value::Object(m) => Ok(m),
        _ => Err(crate::Refusal(format!("config {} is not a JSON object", path.display())).into()),
    }
}

fn given(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => false,
        Value::Array(a) => !a.is_empty(),
        _ => true,
    }
}

/// Overlays the flags that were given on top of the file values. Keys not
/// named by `T` are ignored.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>) -> Result<T> {
    let Value::Object(fl) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialize to objects");
    };
    let mut out = Map::new();
    for (k, v) in fl {
        let chosen = if given(&v) { v } else { file.get(&k).cloned().unwrap_or(v) };
        out.insert(k, chosen);
    }
    serde_json::from_value(Value::Object(out)).context("config value has the wrong type")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Default, Debug, PartialEq)]
    struct A {
        n: Option<usize>,
        q: Option<f64>,
        plot: bool,
        perms: Vec<String>,
    }

    #[test]
    fn flags_win_and_gaps_are_filled() {
        let file: Map<String, Value> = serde_json::from_str(r#"{"n": 5, "q": 0.25, "plot": true, "perms": ["12"], "other": 1}"#).unwrap();
        let flags = A { n: Some(7), ..Default::default() };
        let m = merge(&flags, &file).unwrap();
        assert_eq!(m, A { n: Some(7), q: Some(0.25), plot: true, perms: vec!["12".into()] });
    }

    #[test]
    fn wrong_types_are_reported() {
        let file: Map<String, Value> = serde_json::from_str(r#"{"n": "five"}"#).unwrap();
        assert!(merge(&A::default(), &file).is_err());
    }
}
