//! Deterministic serialization: sorted keys, 17 significant digits, LF.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;
use serde_json::Value;
use transs_core::Trajectory;

use crate::CliError;

/// Seventeen significant digits; non-finite values become empty fields
/// in CSV and `null` in JSON.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let v = n.as_f64().unwrap_or(f64::NAN);
                if v.is_finite() {
                    out.push_str(&format_float(v));
                } else {
                    out.push_str("null");
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(value).map_err(|e| CliError::Output(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Builds a CSV document with a header row and LF terminators.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[String]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(header)
            .map_err(|e| CliError::Output(e.to_string()))?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn floats(&mut self, values: impl IntoIterator<Item = f64>) -> Result<(), CliError> {
        self.row(values.into_iter().map(format_float))
    }

    pub fn finish(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Columns `t, x1..xd, v1..vd`.
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>, CliError> {
    let d = traj.dim();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("x", d))
        .chain(numbered("v", d))
        .collect();
    let mut table = Table::new(&header)?;
    for i in 0..traj.len() {
        table.floats(
            std::iter::once(traj.times[i])
                .chain(traj.positions[i].iter().copied())
                .chain(traj.velocities[i].iter().copied()),
        )?;
    }
    table.finish()
}

pub fn read_trajectory_csv(path: &Path, model_name: &str, q: f64) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_trajectory_csv(&text, model_name, q).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_trajectory_csv(text: &str, model_name: &str, q: f64) -> Result<Trajectory, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let width = header.len();
    if width < 3 || width % 2 == 0 || header.get(0) != Some("t") {
        return Err("expected header t, x1..xd, v1..vd".into());
    }
    let d = (width - 1) / 2;
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("x", d))
        .chain(numbered("v", d))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format!("expected header {}", expected.join(",")));
    }
    let (mut times, mut positions, mut velocities) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let values = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| format!("row {}: {e}", row + 2))?;
        times.push(values[0]);
        positions.push(DVector::from_column_slice(&values[1..=d]));
        velocities.push(DVector::from_column_slice(&values[d + 1..]));
    }
    Trajectory::from_samples(model_name, q, times, positions, velocities).map_err(|e| e.to_string())
}

pub fn print(out: &mut dyn Write, text: &str) {
    // a closed stdout is not worth failing the run over
    let _ = out.write_all(text.as_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted_and_nan_is_null() {
        let mut m = HashMap::new();
        m.insert("b", f64::NAN);
        m.insert("a", 0.1);
        m.insert("c", f64::INFINITY);
        let text = canonical_json(&m).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": 1.0000000000000001e-1,\n  \"b\": null,\n  \"c\": null\n}\n"
        );
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), "");
    }

    #[test]
    fn integers_stay_integers() {
        assert_eq!(canonical_json(&vec![3u64]).unwrap(), "[\n  3\n]\n");
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_trajectory_csv("t,x1\n0,1\n", "m", 0.0).is_err());
        assert!(parse_trajectory_csv("t,x1,v1\n0,1,abc\n", "m", 0.0).is_err());
        assert!(parse_trajectory_csv("t,y1,v1\n0,1,1\n", "m", 0.0).is_err());
    }
}
