//! Report rendering. JSON is pretty-printed with sorted keys; CSV is either
//! a table (for a list of flat records) or `key,value` rows with dotted keys.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

/// One output file, kept in memory until the single writer flushes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            bytes,
        }
    }

    /// `stem.json` or `stem.csv` holding `value`.
    pub fn report<T: Serialize>(stem: &str, value: &T, format: Format) -> Self {
        let ext = match format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        Artifact::new(format!("{stem}.{ext}"), render(value, format))
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}

pub fn render<T: Serialize>(value: &T, format: Format) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("reports serialize to JSON");
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v).expect("JSON value renders");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => to_csv(&v).into_bytes(),
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(quote(s)),
        _ => None,
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flat_record(v: &Value) -> Option<Vec<(&str, String)>> {
    let obj = v.as_object()?;
    obj.iter()
        .map(|(k, x)| Some((k.as_str(), scalar(x)?)))
        .collect()
}

fn to_csv(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Array(rows) = v {
        let recs: Option<Vec<_>> = rows.iter().map(flat_record).collect();
        if let Some(recs) = recs.filter(|r| !r.is_empty()) {
            let header: Vec<&str> = recs[0].iter().map(|(k, _)| *k).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for r in &recs {
                let row: Vec<&str> = r.iter().map(|(_, x)| x.as_str()).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            return out;
        }
    }
    out.push_str("key,value\n");
    flatten("", v, &mut out);
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        _ => {
            out.push_str(&quote(prefix));
            out.push(',');
            out.push_str(&scalar(v).unwrap_or_default());
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flat_records_become_a_table() {
        let v = json!([{"a": 1, "b": "x,y"}, {"a": 2, "b": null}]);
        assert_eq!(to_csv(&v), "a,b\n1,\"x,y\"\n2,\n");
    }

    #[test]
    fn nested_values_become_dotted_keys() {
        let v = json!({"block": {"R1": 2.5}, "list": [true, 3]});
        assert_eq!(
            to_csv(&v),
            "key,value\nblock.R1,2.5\nlist.0,true\nlist.1,3\n"
        );
    }

    #[test]
    fn json_reparses() {
        let bytes = render(&json!({"x": [1.5, -0.25]}), Format::Json);
        let back: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back["x"][1], -0.25);
    }
}
