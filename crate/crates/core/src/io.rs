//! File formats: labeled CSV matrices, header-free dense CSV, JSON matrix
//! envelopes, loadings tables, and atomic writes.
//!
//! Numbers are written with 17 significant digits so every `f64`
//! round-trips exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_serde;

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A numeric matrix with row and column labels, as read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    /// Label of the top-left header cell.
    pub corner: String,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: DMatrix<f64>,
}

fn parse_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}: {msg}"))
}

/// Parses CSV whose first row holds column labels and whose first column
/// holds row labels; every other cell must be a number.
pub fn parse_labeled_csv(text: &str) -> Result<LabeledMatrix> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(&e))?,
        None => return Err(parse_error(1, "empty input")),
    };
    if header.len() < 2 {
        return Err(parse_error(1, "header needs a row-label column and at least one data column"));
    }
    let corner = header[0].trim_start_matches('\u{feff}').to_string();
    let col_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let p = col_ids.len();
    let mut row_ids = Vec::new();
    let mut data = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(&e))?;
        let lineno = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != p + 1 {
            return Err(parse_error(lineno, format!("expected {} fields, found {}", p + 1, record.len())));
        }
        row_ids.push(record[0].to_string());
        for (j, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_error(lineno, format!("column {:?}: {cell:?} is not a number", col_ids[j])))?;
            if !v.is_finite() {
                return Err(parse_error(lineno, format!("column {:?}: value is not finite", col_ids[j])));
            }
            data.push(v);
        }
    }
    if row_ids.is_empty() {
        return Err(parse_error(1, "no data rows"));
    }
    let values = DMatrix::from_row_slice(row_ids.len(), p, &data);
    Ok(LabeledMatrix { corner, row_ids, col_ids, values })
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_error(line, e)
}

/// CSV-escapes a label when it contains a delimiter, quote or newline.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn read_labeled_csv(path: &Path) -> Result<LabeledMatrix> {
    let text = fs::read_to_string(path)?;
    parse_labeled_csv(&text).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn labeled_csv(m: &LabeledMatrix) -> String {
    let mut out = String::new();
    out.push_str(&csv_field(&m.corner));
    for c in &m.col_ids {
        out.push(',');
        out.push_str(&csv_field(c));
    }
    out.push('\n');
    for (i, r) in m.row_ids.iter().enumerate() {
        out.push_str(&csv_field(r));
        for j in 0..m.values.ncols() {
            out.push(',');
            out.push_str(&fmt_f64(m.values[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Header-free dense CSV.
pub fn dense_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_dense_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| parse_error(idx + 1, format!("{c:?} is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(idx + 1, format!("expected {} fields, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    matrix_serde::from_rows(&rows).map_err(Error::InvalidInput)
}

/// JSON envelope for a dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEnvelope {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "matrix_serde")]
    pub data: DMatrix<f64>,
}

impl MatrixEnvelope {
    pub fn new(m: DMatrix<f64>) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), data: m }
    }

    pub fn check(&self) -> Result<()> {
        if self.data.nrows() != self.rows || self.data.ncols() != self.cols {
            return Err(Error::Dimension(format!(
                "envelope says {}x{}, data is {}x{}",
                self.rows,
                self.cols,
                self.data.nrows(),
                self.data.ncols()
            )));
        }
        Ok(())
    }
}

/// Loadings table: one line per variable with any nonzero loading, one
/// column per component, zero entries left blank.
pub fn loadings_csv(labels: &[String], v: &DMatrix<f64>) -> Result<String> {
    if labels.len() != v.nrows() {
        return Err(Error::Dimension(format!("{} labels for {} loading rows", labels.len(), v.nrows())));
    }
    let mut out = String::from("label");
    for j in 1..=v.ncols() {
        out.push_str(&format!(",PC{j}"));
    }
    out.push('\n');
    for (i, name) in labels.iter().enumerate() {
        let row = v.row(i);
        if row.iter().all(|x| *x == 0.0) {
            continue;
        }
        out.push_str(&csv_field(name));
        for x in row.iter() {
            out.push(',');
            if *x != 0.0 {
                out.push_str(&fmt_f64(*x));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_round_trip() {
        let text = "doc,alpha,beta\nd1,1,0\nd2,0.5,3e2\n";
        let m = parse_labeled_csv(text).unwrap();
        assert_eq!(m.corner, "doc");
        assert_eq!(m.col_ids, vec!["alpha", "beta"]);
        assert_eq!(m.row_ids, vec!["d1", "d2"]);
        assert_eq!(m.values[(1, 1)], 300.0);
        let again = parse_labeled_csv(&labeled_csv(&m)).unwrap();
        assert_eq!(again, m);

        let quoted = parse_labeled_csv("id,\"a,b\",c\nr1,1,2\n").unwrap();
        assert_eq!(quoted.col_ids, vec!["a,b", "c"]);
        assert_eq!(parse_labeled_csv(&labeled_csv(&quoted)).unwrap(), quoted);
    }

    #[test]
    fn malformed_csv_names_line() {
        let err = parse_labeled_csv("id,a,b\nr1,1,2\nr2,1,x\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_labeled_csv("id,a,b\nr1,1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_labeled_csv("").is_err());
        assert!(parse_labeled_csv("id,a\n").is_err());
    }

    #[test]
    fn loadings_leave_zeros_blank() {
        let v = DMatrix::from_row_slice(3, 2, &[0.5, 0.0, 0.0, 0.0, -0.25, 1.0]);
        let labels = vec!["a".into(), "b".into(), "c".into()];
        let csv = loadings_csv(&labels, &v).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "label,PC1,PC2");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,5.0000000000000000e-1,"));
        assert!(lines[1].ends_with(','));
        assert!(lines[2].starts_with("c,"));
    }

    #[test]
    fn envelope_json() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let e = MatrixEnvelope::new(m.clone());
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"data\":[[1.0,2.0,3.0],[4.0,5.0,6.0]]"));
        let back: MatrixEnvelope = serde_json::from_str(&s).unwrap();
        back.check().unwrap();
        assert_eq!(back.data, m);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest::proptest! {
        #[test]
        fn dense_csv_round_trips_exactly(
            vals in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 1..40),
            cols in 1usize..5,
        ) {
            let rows = vals.len() / cols;
            proptest::prop_assume!(rows > 0);
            let m = DMatrix::from_row_slice(rows, cols, &vals[..rows * cols]);
            let back = parse_dense_csv(&dense_csv(&m)).unwrap();
            proptest::prop_assert_eq!(back, m);
        }
    }
}
