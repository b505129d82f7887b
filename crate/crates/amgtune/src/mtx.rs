//! Matrix Market reader and writer.
//!
//! Sparse matrices use the coordinate format (real or integer field, general
//! or symmetric). Dense vectors use the array format with a single column.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use amgtune_core::sparse::SparseError;
use amgtune_core::CsrMatrix;

#[derive(Debug, thiserror::Error)]
pub enum MtxError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid matrix: {0}")]
    Matrix(#[from] SparseError),
}

fn perr(line: usize, msg: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Header {
    format: String,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header, MtxError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(perr(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if words[1] != "matrix" {
        return Err(perr(1, format!("unsupported object `{}`", words[1])));
    }
    match words[3].as_str() {
        "real" | "integer" => {}
        "pattern" | "complex" => return Err(perr(1, format!("{} matrices are not supported", words[3]))),
        f => return Err(perr(1, format!("unknown field `{f}`"))),
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        s => return Err(perr(1, format!("unsupported symmetry `{s}`"))),
    };
    match words[2].as_str() {
        "coordinate" | "array" => {}
        f => return Err(perr(1, format!("unknown format `{f}`"))),
    }
    Ok(Header {
        format: words[2].clone(),
        symmetry,
    })
}

/// Non-comment, non-blank lines after the header, with 1-based line numbers.
fn body(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MtxError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("bad {what} `{tok}`")))
}

/// Parses a coordinate-format matrix. Symmetric storage is expanded,
/// rows are sorted and duplicate entries summed.
pub fn parse_matrix(text: &str) -> Result<CsrMatrix, MtxError> {
    let first = text.lines().next().ok_or_else(|| perr(1, "empty file"))?;
    let header = parse_header(first)?;
    if header.format != "coordinate" {
        return Err(perr(1, "sparse matrices must use the coordinate format"));
    }
    let mut lines = body(text);
    let (size_line, size) = lines.next().ok_or_else(|| perr(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let n_rows: usize = parse_num(tok.next(), size_line, "row count")?;
    let n_cols: usize = parse_num(tok.next(), size_line, "column count")?;
    let nnz: usize = parse_num(tok.next(), size_line, "entry count")?;
    if tok.next().is_some() {
        return Err(perr(size_line, "trailing tokens on size line"));
    }
    if header.symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(perr(size_line, "symmetric matrix must be square"));
    }

    let mut triplets = Vec::with_capacity(nnz * 2);
    let mut last_line = size_line;
    for k in 0..nnz {
        let Some((line, entry)) = lines.next() else {
            return Err(perr(
                last_line + 1,
                format!("truncated body: header declares {nnz} entries, found {k}"),
            ));
        };
        last_line = line;
        let mut tok = entry.split_whitespace();
        let i: usize = parse_num(tok.next(), line, "row index")?;
        let j: usize = parse_num(tok.next(), line, "column index")?;
        let v: f64 = parse_num(tok.next(), line, "value")?;
        if tok.next().is_some() {
            return Err(perr(line, "trailing tokens after value"));
        }
        if i == 0 || j == 0 || i > n_rows || j > n_cols {
            return Err(perr(
                line,
                format!("index ({i}, {j}) outside the declared {n_rows}x{n_cols}"),
            ));
        }
        if header.symmetry == Symmetry::Symmetric && j > i {
            return Err(perr(line, format!("entry ({i}, {j}) above the diagonal of symmetric storage")));
        }
        triplets.push((i - 1, j - 1, v));
        if header.symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(perr(line, format!("more than the declared {nnz} entries")));
    }
    Ok(CsrMatrix::from_triplets(n_rows, n_cols, &triplets)?)
}

/// Parses a single-column array-format vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, MtxError> {
    let first = text.lines().next().ok_or_else(|| perr(1, "empty file"))?;
    let header = parse_header(first)?;
    if header.format != "array" || header.symmetry != Symmetry::General {
        return Err(perr(1, "vectors must use the general array format"));
    }
    let mut lines = body(text);
    let (size_line, size) = lines.next().ok_or_else(|| perr(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let n: usize = parse_num(tok.next(), size_line, "row count")?;
    let cols: usize = parse_num(tok.next(), size_line, "column count")?;
    if cols != 1 || tok.next().is_some() {
        return Err(perr(size_line, "expected `<n> 1`"));
    }
    let mut out = Vec::with_capacity(n);
    let mut last_line = size_line;
    for k in 0..n {
        let Some((line, entry)) = lines.next() else {
            return Err(perr(
                last_line + 1,
                format!("truncated body: header declares {n} entries, found {k}"),
            ));
        };
        last_line = line;
        out.push(parse_num(Some(entry), line, "value")?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(perr(line, format!("more than the declared {n} entries")));
    }
    Ok(out)
}

/// General coordinate form; values use the shortest round-tripping decimal.
pub fn format_matrix(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(a.nnz() * 24 + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:?}", i + 1, j + 1, v);
    }
    s
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 24 + 64);
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:?}");
    }
    s
}

fn read(path: &Path) -> Result<String, MtxError> {
    fs::read_to_string(path).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), MtxError> {
    fs::write(path, text).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<CsrMatrix, MtxError> {
    parse_matrix(&read(path)?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>, MtxError> {
    parse_vector(&read(path)?)
}

pub fn write_matrix(path: &Path, a: &CsrMatrix) -> Result<(), MtxError> {
    write(path, &format_matrix(a))
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<(), MtxError> {
    write(path, &format_vector(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let a = parse_matrix("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n").unwrap();
        assert_eq!(a.n_rows(), 2);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.values(), &[1.0, 1.0]);
    }

    #[test]
    fn symmetric_lower_triangle_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% tridiagonal\n3 3 5\n1 1 2\n2 1 -1\n2 2 2\n3 2 -1\n3 3 2\n";
        let a = parse_matrix(text).unwrap();
        assert_eq!(a.nnz(), 7);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert!(a.is_symmetric());
    }

    #[test]
    fn truncated_body_names_the_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n5 5 5\n1 1 1\n2 2 1\n3 3 1\n4 4 1\n";
        let e = parse_matrix(text).unwrap_err().to_string();
        assert!(e.contains("line 7") && e.contains("truncated"), "{e}");
    }

    #[test]
    fn rejected_inputs() {
        let cases = [
            ("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n", "line 1"),
            ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", "line 1"),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", "line 3"),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n", "line 3"),
            ("%MatrixMarket matrix coordinate real general\n", "line 1"),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n", "line 4"),
        ];
        for (text, needle) in cases {
            let e = parse_matrix(text).unwrap_err().to_string();
            assert!(e.contains(needle), "{e}");
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let a = parse_matrix("%%MatrixMarket matrix coordinate integer general\n1 1 2\n1 1 3\n1 1 4\n").unwrap();
        assert_eq!(a.values(), &[7.0]);
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.0, -0.1, 1e-300, 3.0f64.sqrt()];
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
    }
}
