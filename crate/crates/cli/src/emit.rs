//! Bit-stable artifact serialization: fixed field order and floats written
//! with 17 significant digits, so repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

/// A float with 17 significant digits; NaN and infinities as `nan`, `inf`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON text of `value` with keys in declaration order and every
/// non-integer number in 17-digit exponent form. Non-finite floats become
/// `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("artifacts serialize to JSON");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| {
        out.push('\n');
        out.push_str(&"  ".repeat(d));
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let x = n.as_f64().expect("JSON number is finite");
                out.push_str(&format!("{x:.16e}"));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, depth + 1);
                }
                out.push(']');
            } else {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    pad(out, depth + 1);
                    write_value(out, item, depth + 1);
                }
                pad(out, depth);
                out.push(']');
            }
        }
        Value::Object(map) => {
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                pad(out, depth + 1);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, item, depth + 1);
            }
            if !map.is_empty() {
                pad(out, depth);
            }
            out.push('}');
        }
    }
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io)?;
        }
    }
    fs::write(path, text).map_err(io)
}

/// Writes `<dir>/<stem>.csv` and/or `<dir>/<stem>.json` according to
/// `format`; returns the paths written.
pub fn emit<T: Serialize>(
    value: &T,
    csv: impl FnOnce() -> String,
    format: Format,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    if format.csv() {
        let p = dir.join(format!("{stem}.csv"));
        write_file(&p, &csv())?;
        written.push(p);
    }
    if format.json() {
        let p = dir.join(format!("{stem}.json"));
        write_file(&p, &to_json(value))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        zeta: f64,
        alpha: Vec<f64>,
        count: usize,
        missing: f64,
    }

    #[test]
    fn floats_keep_seventeen_digits_and_field_order() {
        let s = Sample { zeta: 0.1, alpha: vec![1.0, -2.5e-300], count: 3, missing: f64::NAN };
        let text = to_json(&s);
        assert!(text.find("zeta").unwrap() < text.find("alpha").unwrap());
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("\"count\": 3"));
        assert!(text.contains("\"missing\": null"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["zeta"].as_f64().unwrap(), 0.1);
        assert_eq!(back["alpha"][1].as_f64().unwrap(), -2.5e-300);
    }

    #[test]
    fn float_round_trips_bitwise() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-310, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(float(f64::NAN), "nan");
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = write_file(Path::new("/proc/definitely/not/here.csv"), "x").unwrap_err();
        assert!(err.to_string().contains("/proc/definitely/not/here.csv"));
        assert_eq!(err.exit_code(), 2);
    }
}
