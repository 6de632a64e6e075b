//! Matrix Market input, equilibration, and the entry-to-weight transform.
//!
//! Indices are 0-based in memory. Matrix Market files and scaling files
//! are 1-based.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate entry at ({row}, {col}) (1-based)")]
    DuplicateEntry { row: usize, col: usize },
    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),
    #[error("{kind} {index} (1-based) has no entries; matrix is structurally singular")]
    EmptyRowOrColumn { kind: LineKind, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Row,
    Column,
}

impl std::fmt::Display for LineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineKind::Row => f.write_str("row"),
            LineKind::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Coordinate-format sparse matrix. No duplicate positions, no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Entry>,
}

impl SparseMatrix {
    /// Builds a matrix from 0-based triplets, dropping exact zeros.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self, MatrixError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (row, col, value) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(MatrixError::Parse {
                    line: 0,
                    msg: format!("entry ({}, {}) outside {n_rows}x{n_cols}", row + 1, col + 1),
                });
            }
            if !value.is_finite() {
                return Err(MatrixError::Parse {
                    line: 0,
                    msg: format!("non-finite value at ({}, {})", row + 1, col + 1),
                });
            }
            if !seen.insert((row, col)) {
                return Err(MatrixError::DuplicateEntry { row: row + 1, col: col + 1 });
            }
            if value != 0.0 {
                entries.push(Entry { row, col, value });
            }
        }
        Ok(SparseMatrix { n_rows, n_cols, entries })
    }

    /// Builds a matrix from dense rows; zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        Self::from_triplets(n_rows, n_cols, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Value at a 0-based position, or `None` if not stored.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.row == row && e.col == col)
            .map(|e| e.value)
    }

    fn map_values(&self, f: impl Fn(&Entry) -> f64) -> SparseMatrix {
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self
                .entries
                .iter()
                .map(|e| Entry { value: f(e), ..*e })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix, MatrixError> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

/// Parses a coordinate real (or integer) Matrix Market document.
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix, MatrixError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, header) = lines.next().ok_or(MatrixError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let symmetry = parse_header(header)?;

    let mut size_line = None;
    for (no, line) in lines.by_ref() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some((no, t));
        break;
    }
    let (size_no, size) = size_line.ok_or(MatrixError::Parse {
        line: 2,
        msg: "missing size line".into(),
    })?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| MatrixError::Parse { line: size_no, msg: format!("bad size line: {e}") })?;
    let [n_rows, n_cols, nnz] = dims[..] else {
        return Err(MatrixError::Parse {
            line: size_no,
            msg: "size line must hold three integers".into(),
        });
    };
    if symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(MatrixError::Parse {
            line: size_no,
            msg: "symmetric matrix must be square".into(),
        });
    }

    let mut triplets = Vec::with_capacity(if symmetry == Symmetry::Symmetric { 2 * nnz } else { nnz });
    let mut read = 0usize;
    for (no, line) in lines {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let bad = |msg: String| MatrixError::Parse { line: no, msg };
        let mut fields = t.split_whitespace();
        let mut next_index = |what: &str| -> Result<usize, MatrixError> {
            let s = fields.next().ok_or_else(|| bad(format!("missing {what} index")))?;
            let v: usize = s.parse().map_err(|_| bad(format!("bad {what} index {s:?}")))?;
            if v == 0 {
                return Err(bad(format!("{what} index must be 1-based")));
            }
            Ok(v - 1)
        };
        let row = next_index("row")?;
        let col = next_index("column")?;
        let s = fields.next().ok_or_else(|| bad("missing value".into()))?;
        let value: f64 = s.parse().map_err(|_| bad(format!("bad value {s:?}")))?;
        if fields.next().is_some() {
            return Err(bad("trailing fields".into()));
        }
        if row >= n_rows || col >= n_cols {
            return Err(bad(format!("entry ({}, {}) outside {n_rows}x{n_cols}", row + 1, col + 1)));
        }
        read += 1;
        if read > nnz {
            return Err(bad(format!("more than the {nnz} declared entries")));
        }
        triplets.push((row, col, value));
        if symmetry == Symmetry::Symmetric && row != col {
            triplets.push((col, row, value));
        }
    }
    if read != nnz {
        return Err(MatrixError::Parse {
            line: size_no,
            msg: format!("declared {nnz} entries, found {read}"),
        });
    }
    SparseMatrix::from_triplets(n_rows, n_cols, triplets)
}

fn parse_header(header: &str) -> Result<Symmetry, MatrixError> {
    let bad = |msg: &str| MatrixError::Parse { line: 1, msg: msg.into() };
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(bad("expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[1] != "matrix" {
        return Err(MatrixError::UnsupportedFormat(format!("object {}", tokens[1])));
    }
    match tokens[2].as_str() {
        "coordinate" => {}
        "array" => return Err(MatrixError::UnsupportedFormat("array".into())),
        other => return Err(bad(&format!("unknown format {other}"))),
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        "complex" | "pattern" => return Err(MatrixError::UnsupportedFormat(tokens[3].clone())),
        other => return Err(bad(&format!("unknown field {other}"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" | "hermitian" => Err(MatrixError::UnsupportedFormat(tokens[4].clone())),
        other => Err(bad(&format!("unknown symmetry {other}"))),
    }
}

/// Row and column scale factors, all finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

/// Scales |A| so each row, then each column, has maximum 1.
///
/// `row_scale[i] = 1 / max_j |a_ij|`, then
/// `col_scale[j] = 1 / max_i (|a_ij| * row_scale[i])`. After this every
/// column maximum is 1 and every row maximum is at most 1.
pub fn equilibrate(a: &SparseMatrix) -> Result<(SparseMatrix, Scaling), MatrixError> {
    let mut row_max = vec![0.0f64; a.n_rows];
    for e in &a.entries {
        row_max[e.row] = row_max[e.row].max(e.value.abs());
    }
    if let Some(i) = row_max.iter().position(|&m| m == 0.0) {
        return Err(MatrixError::EmptyRowOrColumn { kind: LineKind::Row, index: i + 1 });
    }
    let row_scale: Vec<f64> = row_max.iter().map(|m| 1.0 / m).collect();

    let mut col_max = vec![0.0f64; a.n_cols];
    for e in &a.entries {
        col_max[e.col] = col_max[e.col].max(e.value.abs() * row_scale[e.row]);
    }
    if let Some(j) = col_max.iter().position(|&m| m == 0.0) {
        return Err(MatrixError::EmptyRowOrColumn { kind: LineKind::Column, index: j + 1 });
    }
    let col_scale: Vec<f64> = col_max.iter().map(|m| 1.0 / m).collect();

    let b = a.map_values(|e| e.value.abs() * row_scale[e.row] * col_scale[e.col]);
    Ok((b, Scaling { row_scale, col_scale }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMetric {
    /// Maximize the sum of entries.
    #[default]
    Sum,
    /// Maximize the product of entries, as a sum of logarithms.
    LogProduct,
}

impl WeightMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMetric::Sum => "sum",
            WeightMetric::LogProduct => "logproduct",
        }
    }
}

/// Expects an equilibrated matrix (entries in (0, 1]).
pub fn apply_metric(b: &SparseMatrix, metric: WeightMetric) -> SparseMatrix {
    match metric {
        WeightMetric::Sum => b.clone(),
        WeightMetric::LogProduct => b.map_values(|e| e.value.ln()),
    }
}

/// Plain-text vector: `%` comment lines, then one value per line.
pub fn format_vector(comment: &str, values: &[f64]) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "% {line}");
    }
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>, MatrixError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%')
        })
        .map(|(k, l)| {
            l.trim().parse::<f64>().map_err(|e| MatrixError::Parse {
                line: k + 1,
                msg: format!("bad value: {e}"),
            })
        })
        .collect()
}

impl Scaling {
    /// Writes `row_scaling.txt` and `col_scaling.txt` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        fs::write(
            dir.join("row_scaling.txt"),
            format_vector("row scaling D_r, entry i multiplies row i", &self.row_scale),
        )?;
        fs::write(
            dir.join("col_scaling.txt"),
            format_vector("column scaling D_c, entry j multiplies column j", &self.col_scale),
        )
    }

    pub fn read_from_dir(dir: impl AsRef<Path>) -> Result<Scaling, MatrixError> {
        let dir = dir.as_ref();
        Ok(Scaling {
            row_scale: parse_vector(&fs::read_to_string(dir.join("row_scaling.txt"))?)?,
            col_scale: parse_vector(&fs::read_to_string(dir.join("col_scaling.txt"))?)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_general_file() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 2.0\n2 2 4.0\n",
        )
        .unwrap();
        assert_eq!((m.n_rows(), m.n_cols(), m.nnz()), (2, 2, 2));
        assert_eq!(m.get(0, 0), Some(2.0));
        assert_eq!(m.get(1, 1), Some(4.0));
    }

    #[test]
    fn expands_symmetric() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1.0\n2 1 3.0\n2 2 5.0\n",
        )
        .unwrap();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(1, 0), Some(3.0));
        assert_eq!(m.get(0, 1), Some(3.0));
    }

    #[test]
    fn drops_explicit_zeros() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 0.0\n1 2 1.5\n2 1 2.5\n",
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), None);
    }

    #[test]
    fn rejects_duplicates() {
        let err = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n",
        )
        .unwrap_err();
        assert!(matches!(err, MatrixError::DuplicateEntry { row: 1, col: 1 }));
    }

    #[test]
    fn rejects_unsupported_formats() {
        for header in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate pattern general",
            "%%MatrixMarket matrix array real general",
            "%%MatrixMarket matrix coordinate real skew-symmetric",
            "%%MatrixMarket matrix coordinate real hermitian",
        ] {
            let err = parse_matrix_market(&format!("{header}\n1 1 1\n1 1 1.0\n")).unwrap_err();
            assert!(matches!(err, MatrixError::UnsupportedFormat(_)), "{header}: {err}");
        }
    }

    #[test]
    fn rejects_malformed() {
        for text in [
            "",
            "%%MatrixMarket matrix coordinate real\n",
            "%%MatrixMarket matrix coordinate real general\n2 2\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",
        ] {
            let err = parse_matrix_market(text).unwrap_err();
            assert!(matches!(err, MatrixError::Parse { .. }), "{text:?}: {err}");
        }
    }

    #[test]
    fn equilibrates_diagonal() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let (b, s) = equilibrate(&a).unwrap();
        assert_eq!(s.row_scale, vec![0.5, 0.25]);
        assert_eq!(s.col_scale, vec![1.0, 1.0]);
        assert_eq!(b.get(0, 0), Some(1.0));
        assert_eq!(b.get(1, 1), Some(1.0));
    }

    #[test]
    fn equilibrates_two_pass() {
        // row pass: [[1/2, 1], [1, 1/3]]; column maxima already 1
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let (b, s) = equilibrate(&a).unwrap();
        assert_eq!(s.row_scale, vec![0.5, 1.0 / 3.0]);
        assert_eq!(s.col_scale, vec![1.0, 1.0]);
        assert_eq!(b.get(0, 0), Some(0.5));
        assert_eq!(b.get(0, 1), Some(1.0));
        assert_eq!(b.get(1, 0), Some(1.0));
        assert_eq!(b.get(1, 1), Some(1.0 / 3.0));
    }

    #[test]
    fn equilibrate_takes_magnitudes() {
        let a = SparseMatrix::from_dense(&[vec![-4.0, 1.0], vec![0.0, -2.0]]).unwrap();
        let (b, _) = equilibrate(&a).unwrap();
        assert!(b.entries().iter().all(|e| e.value > 0.0 && e.value <= 1.0));
    }

    #[test]
    fn equilibrate_rejects_empty_column() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let err = equilibrate(&a).unwrap_err();
        assert!(matches!(err, MatrixError::EmptyRowOrColumn { kind: LineKind::Column, index: 2 }));
    }

    #[test]
    fn metrics() {
        let b = SparseMatrix::from_dense(&[vec![1.0, 0.5]]).unwrap();
        let log = apply_metric(&b, WeightMetric::LogProduct);
        assert_eq!(log.get(0, 0), Some(0.0));
        assert!((log.get(0, 1).unwrap() - -std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(apply_metric(&b, WeightMetric::Sum), b);
    }

    #[test]
    fn scaling_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scaling { row_scale: vec![0.5, 1.0 / 3.0], col_scale: vec![1.0, 2.5e-7] };
        s.write_to_dir(dir.path()).unwrap();
        assert_eq!(Scaling::read_from_dir(dir.path()).unwrap(), s);
    }
}
