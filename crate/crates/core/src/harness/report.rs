//! Versioned report envelope and its JSON / CSV encodings.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Bumped on breaking changes to the report layout.
pub const REPORT_VERSION: u32 = 1;

pub const TOOL: &str = "lowtw";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub tool: String,
    pub tool_version: String,
    pub algorithm: String,
    pub config: Value,
    pub passed: bool,
    pub result: Value,
    /// Kept apart so that everything else is reproducible byte for byte.
    pub timing: Timing,
}

impl Report {
    pub fn new(algorithm: &str, config: Value, passed: bool, result: Value, wall_seconds: f64) -> Self {
        Report {
            version: REPORT_VERSION,
            tool: TOOL.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            algorithm: algorithm.into(),
            config,
            passed,
            result,
            timing: Timing { wall_seconds },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        to_csv(&serde_json::to_value(self)?)
    }

    /// Parses a report and checks its envelope.
    pub fn from_value(v: Value) -> Result<Self> {
        validate_report(&v)?;
        Ok(serde_json::from_value(v)?)
    }
}

/// Checks the envelope fields and their types.
pub fn validate_report(v: &Value) -> Result<()> {
    let obj = v.as_object().ok_or_else(|| Error::Validation("report is not a JSON object".into()))?;
    let expect = |key: &str, ok: fn(&Value) -> bool| -> Result<()> {
        match obj.get(key) {
            Some(x) if ok(x) => Ok(()),
            Some(_) => Err(Error::Validation(format!("report field '{key}' has the wrong type"))),
            None => Err(Error::Validation(format!("report lacks field '{key}'"))),
        }
    };
    expect("version", Value::is_u64)?;
    expect("tool", Value::is_string)?;
    expect("tool_version", Value::is_string)?;
    expect("algorithm", Value::is_string)?;
    expect("config", Value::is_object)?;
    expect("passed", Value::is_boolean)?;
    expect("result", |x| !x.is_null())?;
    expect("timing", |x| x.get("wall_seconds").is_some_and(Value::is_number))?;
    let version = obj["version"].as_u64().unwrap_or(0);
    if version != REPORT_VERSION as u64 {
        return Err(Error::Validation(format!("unsupported report version {version}")));
    }
    Ok(())
}

/// Flattens a JSON value into `path,value` rows. Paths join object keys and
/// array indices with `/`; values are the JSON text of each scalar (or of
/// an empty container).
pub fn to_csv(v: &Value) -> Result<String> {
    let mut rows = Vec::new();
    flatten(v, String::new(), &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "value"])?;
    for (path, value) in rows {
        w.write_record([path, value])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    let child = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}/{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(x, child(k), out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, child(&i.to_string()), out);
            }
        }
        _ => out.push((path, v.to_string())),
    }
}

/// Inverse of [`to_csv`] for values whose object keys are not integers.
pub fn from_csv(text: &str) -> Result<Value> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut root = Value::Null;
    for rec in r.records() {
        let rec = rec?;
        let (path, raw) = (&rec[0], &rec[1]);
        let leaf: Value = serde_json::from_str(raw)?;
        if path.is_empty() {
            root = leaf;
            continue;
        }
        let mut at = &mut root;
        for seg in path.split('/') {
            at = match seg.parse::<usize>() {
                Ok(i) => {
                    if !at.is_array() {
                        *at = Value::Array(Vec::new());
                    }
                    let a = at.as_array_mut().expect("just made an array");
                    if a.len() <= i {
                        a.resize(i + 1, Value::Null);
                    }
                    &mut a[i]
                }
                Err(_) => {
                    if !at.is_object() {
                        *at = Value::Object(Map::new());
                    }
                    at.as_object_mut().expect("just made an object").entry(seg).or_insert(Value::Null)
                }
            };
        }
        *at = leaf;
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_round_trip() {
        let r = Report::new(
            "embed",
            json!({"eps": 0.25, "seed": 7, "input": {"grid": [8, 8]}}),
            true,
            json!({"gaps": [0.0, 1.5, -0.0], "name": "a,b \"q\"", "empty": [], "none": {}, "x": null}),
            1.25,
        );
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(from_csv(&r.to_csv().unwrap()).unwrap(), v);
        assert_eq!(Report::from_value(v).unwrap(), r);
    }

    #[test]
    fn envelope_is_checked() {
        let mut v = serde_json::to_value(Report::new("rspd", json!({}), false, json!(1), 0.0)).unwrap();
        assert!(validate_report(&v).is_ok());
        v["version"] = json!(99);
        assert!(validate_report(&v).is_err());
        v.as_object_mut().unwrap().remove("passed");
        assert!(validate_report(&v).is_err());
    }
}
