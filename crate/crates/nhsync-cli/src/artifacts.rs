//! Deterministic artifact writing: CSV numbers use shortest round-trip
//! decimals so reruns are byte-identical.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn fmt_f(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_json<P: AsRef<Path>>(path: P, value: &serde_json::Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
}
