//! Canonical report encoding and atomic file writes.
//!
//! Reports are pretty-printed JSON with object keys sorted and every
//! non-integer number written as `{:.16e}` (17 significant digits), so equal
//! inputs give equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::JobError;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes `value` in canonical form.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, JobError> {
    let v = serde_json::to_value(value).map_err(|e| JobError::Internal(e.to_string()))?;
    let mut out = String::new();
    emit(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn indent(out: &mut String, level: usize) {
    out.push('\n');
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn emit(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&float(n.as_f64().expect("finite number")));
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    emit(item, level, out);
                }
                out.push(']');
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                emit(item, level + 1, out);
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                emit(&map[key.as_str()], level + 1, out);
            }
            indent(out, level);
            out.push('}');
        }
    }
}

/// A file to be written under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }
}

fn temp_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!(".{name}.tmp-{}", std::process::id()))
}

fn write_temp(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    file.sync_all()
}

/// Writes every artifact to a temporary file first and renames them into
/// place only once all have been written; on failure nothing is left behind.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, JobError> {
    let fail = |path: &Path, e: std::io::Error| JobError::Write(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
    let mut temps = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let tmp = temp_path(dir, &a.name);
        if let Err(e) = write_temp(&tmp, &a.bytes) {
            let _ = fs::remove_file(&tmp);
            for t in &temps {
                let _ = fs::remove_file(t);
            }
            return Err(fail(&tmp, e));
        }
        temps.push(tmp);
    }
    let mut finals = Vec::with_capacity(artifacts.len());
    for (a, tmp) in artifacts.iter().zip(&temps) {
        let dest = dir.join(&a.name);
        if let Err(e) = fs::rename(tmp, &dest) {
            for t in &temps {
                let _ = fs::remove_file(t);
            }
            return Err(fail(&dest, e));
        }
        finals.push(dest);
    }
    Ok(finals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.1, "a": [1, 2.5], "c": {"z": null, "y": "s"}});
        let text = canonical_json(&v).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": \"s\",\n    \"z\": null\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 1e-300, -2.5e17] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn write_all_places_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested");
        let paths = write_all(
            &out,
            &[Artifact::new("a.json", "{}"), Artifact::new("b.csv", "x\n")],
        )
        .unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(fs::read_to_string(&paths[1]).unwrap(), "x\n");
        let leftovers: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .starts_with('.')
            })
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "").unwrap();
        let err = write_all(&blocker.join("sub"), &[Artifact::new("a.json", "{}")]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
