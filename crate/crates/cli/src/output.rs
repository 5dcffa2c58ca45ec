//! CSV/JSON rendering and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use dickelab_core::dynamics::{RunMetadata, Trajectory};
use dickelab_core::energetics::Calculation;
use dickelab_core::scaling::SweepSummary;
use serde::Serialize;

use crate::config::Format;

/// Rounds to 9 significant digits and prints the shortest decimal that
/// round-trips, so `1` comes out as `1.0`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    times: &'a [f64],
    labels: &'a [String],
    records: &'a [Vec<f64>],
    metadata: &'a RunMetadata,
}

fn csv_writer() -> csv::WriterBuilder {
    let mut b = csv::WriterBuilder::new();
    b.terminator(csv::Terminator::CRLF);
    b
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> io::Result<Vec<u8>> {
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

pub fn render_trajectory(tr: &Trajectory, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(&TrajectoryJson {
            times: &tr.times,
            labels: &tr.labels,
            records: &tr.records,
            metadata: &tr.metadata,
        }),
        Format::Csv => {
            let mut w = csv_writer().from_writer(Vec::new());
            let mut header = vec!["time".to_owned()];
            header.extend(tr.labels.iter().cloned());
            w.write_record(&header)?;
            for (t, row) in tr.times.iter().zip(&tr.records) {
                let mut rec = vec![format_number(*t)];
                rec.extend(row.iter().map(|v| format_number(*v)));
                w.write_record(&rec)?;
            }
            finish_csv(w)
        }
    }
}

pub fn render_sweep(summary: &SweepSummary, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(summary),
        Format::Csv => {
            let mut w = csv_writer().from_writer(Vec::new());
            let metric = serde_json::to_value(summary.metric).map_err(io::Error::other)?;
            w.write_record(["N", metric.as_str().unwrap_or("metric")])?;
            for (n, v) in summary.n_values.iter().zip(&summary.values) {
                w.write_record([n.to_string(), format_number(*v)])?;
            }
            finish_csv(w)
        }
    }
}

pub fn render_calculation(calc: &Calculation, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(calc),
        Format::Csv => {
            let mut w = csv_writer().from_writer(Vec::new());
            w.write_record(["formula", "value", "unit"])?;
            w.write_record([calc.formula.clone(), format_number(calc.value), calc.unit.clone()])?;
            finish_csv(w)
        }
    }
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> io::Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_nine_significant_digits() {
        assert_eq!(format_number(1.0), "1.0");
        assert_eq!(format_number(0.0), "0.0");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333");
        assert_eq!(format_number(-2.5e-12), "-2.5e-12");
        assert_eq!(format_number(123456789012.0), "123456789000.0");
    }

    #[test]
    fn emit_replaces_file_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit(b"first", Some(&path)).unwrap();
        emit(b"second", Some(&path)).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest::proptest! {
        #[test]
        fn formatted_numbers_parse_back_within_rounding(x in proptest::num::f64::NORMAL) {
            let y: f64 = format_number(x).parse().unwrap();
            proptest::prop_assert!((y - x).abs() <= 5e-9 * x.abs());
        }
    }
}
