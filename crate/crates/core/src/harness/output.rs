//! CSV and manifest files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::observables::ObservableSeries;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// Twelve significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.11e}")
}

/// Renders series as CSV text. Rows are the sorted union of all time
/// stamps; a series without a value at some time leaves its cell empty.
pub fn csv_string(series: &[ObservableSeries]) -> String {
    let mut rows: BTreeMap<u64, Vec<Option<f64>>> = BTreeMap::new();
    for (k, s) in series.iter().enumerate() {
        for (&t, &v) in s.times.iter().zip(&s.values) {
            // times are non-negative, so the bit pattern orders like the value
            let row = rows.entry(t.to_bits()).or_insert_with(|| vec![None; series.len()]);
            row[k] = Some(v);
        }
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = std::iter::once("t_fs".to_string()).chain(series.iter().map(|s| s.label.clone()));
    writer.write_record(header).expect("in-memory write");
    for (t, cells) in rows {
        let record = std::iter::once(format_number(f64::from_bits(t)))
            .chain(cells.into_iter().map(|c| c.map(format_number).unwrap_or_default()));
        writer.write_record(record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn write_csv(series: &[ObservableSeries], path: &Path) -> Result<(), OutputError> {
    fs::write(path, csv_string(series)).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a file written by [`write_csv`]. Fingerprints are not stored in
/// the file and come back empty.
pub fn read_csv(path: &Path) -> Result<Vec<ObservableSeries>, OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let format_err = |message: String| OutputError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("t_fs") {
        return Err(format_err("first column must be t_fs".into()));
    }
    let mut series: Vec<ObservableSeries> = headers.iter().skip(1).map(|l| ObservableSeries::new(l, "")).collect();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let parse = |cell: &str| {
            cell.parse::<f64>()
                .map_err(|_| format_err(format!("row {}: cannot parse `{cell}`", line + 2)))
        };
        let t = parse(&record[0])?;
        for (s, cell) in series.iter_mut().zip(record.iter().skip(1)) {
            if !cell.is_empty() {
                s.times.push(t);
                s.values.push(parse(cell)?);
            }
        }
    }
    Ok(series)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(value).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, pts: &[(f64, f64)]) -> ObservableSeries {
        let mut s = ObservableSeries::new(label, "");
        for &(t, v) in pts {
            s.push(t, v);
        }
        s
    }

    #[test]
    fn empty_set_is_header_only() {
        assert_eq!(csv_string(&[]), "t_fs\n");
    }

    #[test]
    fn three_points_make_four_lines() {
        let s = series("C_R@0.5", &[(0.0, 1.0), (0.5, 1.001), (1.0, 0.999)]);
        let text = csv_string(&[s]);
        assert_eq!(text.lines().count(), 4);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.lines().next(), Some("t_fs,C_R@0.5"));
        assert_eq!(text.lines().nth(2), Some("5.00000000000e-1,1.00100000000e0"));
    }

    #[test]
    fn round_trip_keeps_twelve_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let a = series("P_left@0.01", &[(0.0, 1.0 / 3.0), (5.0, 2.0e-7 / 7.0), (10.0, -0.125)]);
        let b = series("P_left@0.1", &[(0.0, 0.1), (5.0, std::f64::consts::PI)]);
        write_csv(&[a.clone(), b.clone()], &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (orig, read) in [a, b].iter().zip(&back) {
            assert_eq!(orig.label, read.label);
            assert_eq!(orig.times, read.times);
            for (&x, &y) in orig.values.iter().zip(&read.values) {
                assert!((x - y).abs() <= 5e-12 * x.abs(), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn missing_cells_stay_missing() {
        let a = series("a", &[(0.0, 1.0), (1.0, 2.0)]);
        let b = series("b", &[(0.0, 3.0)]);
        let text = csv_string(&[a, b]);
        assert_eq!(text.lines().nth(2), Some("1.00000000000e0,2.00000000000e0,"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_csv(&[], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
