//! Deterministic file emission. Every CSV starts with a comment line
//! carrying the config hash, then a header row; floats print in
//! scientific notation with shortest round-trip mantissas. No timestamps
//! anywhere, so a rerun of the same config and seed reproduces files
//! byte for byte.

use std::io::Write;
use std::path::Path;

/// Canonical float formatting for CSV bodies.
pub fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv(
    path: &Path,
    config_hash: u64,
    columns: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut body = String::new();
    body.push_str(&format!("# config {config_hash:016x}\n"));
    body.push_str(&columns.join(","));
    body.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        body.push_str(&row.join(","));
        body.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(body.as_bytes())
}

/// Serialize a report to JSON with the config hash embedded at the top
/// level. Keys serialize in sorted order, so the bytes are stable.
pub fn write_json<T: serde::Serialize>(
    path: &Path,
    config_hash: u64,
    report: &T,
) -> std::io::Result<String> {
    let mut value = serde_json::to_value(report).expect("report serializes");
    if let serde_json::Value::Object(ref mut map) = value {
        map.insert(
            "config_hash".to_string(),
            serde_json::Value::String(format!("{config_hash:016x}")),
        );
    } else {
        value = serde_json::json!({
            "config_hash": format!("{config_hash:016x}"),
            "report": value,
        });
    }
    let text = format!("{:#}\n", value);
    std::fs::write(path, &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.25, -1.0 / 3.0, 1e-308, 3.868688322236703e-1, 0.0] {
            let s = fmt_f(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f(0.25), "2.5e-1");
    }
}
