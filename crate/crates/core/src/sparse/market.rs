//! Matrix Market coordinate-format reader and a canonical writer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CsrMatrix, DenseVector, DualMatrix, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy)]
struct Header {
    layout: Layout,
    field: Field,
    symmetric: bool,
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

fn parse_banner(line: &str, lineno: usize) -> Result<Header> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return parse_err(lineno, "expected banner '%%MatrixMarket matrix <format> <field> <symmetry>'");
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return parse_err(lineno, format!("unsupported format '{other}'")),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return parse_err(lineno, format!("unsupported field '{other}'")),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return parse_err(lineno, format!("unsupported symmetry '{other}'")),
    };
    Ok(Header { layout, field, symmetric })
}

struct Body {
    header: Header,
    rows: usize,
    cols: usize,
    // 0-based, symmetric entries already mirrored
    entries: Vec<(usize, usize, f64)>,
    // array layout: column-major values
    dense: Vec<f64>,
}

fn parse_number<T: std::str::FromStr>(tok: Option<&str>, lineno: usize, what: &str) -> Result<T> {
    match tok {
        Some(t) => t.parse::<T>().map_err(|_| Error::Parse { line: lineno, message: format!("invalid {what} '{t}'") }),
        None => parse_err(lineno, format!("missing {what}")),
    }
}

fn read_body(reader: impl BufRead) -> Result<Body> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return parse_err(1, "empty file"),
    };
    let header = parse_banner(&first, first_no)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut dense = Vec::new();
    let mut raw_entries = 0usize;
    let mut last_line = first_no;
    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        match size {
            None => {
                let rows = parse_number::<usize>(toks.next(), lineno, "row count")?;
                let cols = parse_number::<usize>(toks.next(), lineno, "column count")?;
                let count = match header.layout {
                    Layout::Coordinate => parse_number::<usize>(toks.next(), lineno, "entry count")?,
                    Layout::Array => rows * cols,
                };
                if toks.next().is_some() {
                    return parse_err(lineno, "trailing tokens on size line");
                }
                size = Some((rows, cols, count));
            }
            Some((rows, cols, count)) => match header.layout {
                Layout::Coordinate => {
                    if raw_entries >= count {
                        return parse_err(lineno, "more entries than declared");
                    }
                    raw_entries += 1;
                    let i = parse_number::<usize>(toks.next(), lineno, "row index")?;
                    let j = parse_number::<usize>(toks.next(), lineno, "column index")?;
                    if i == 0 || j == 0 || i > rows || j > cols {
                        return parse_err(lineno, format!("coordinate ({i}, {j}) outside {rows}x{cols}"));
                    }
                    let v = match header.field {
                        Field::Pattern => 1.0,
                        Field::Real | Field::Integer => parse_number::<f64>(toks.next(), lineno, "value")?,
                    };
                    let (r, c) = (i - 1, j - 1);
                    entries.push((r, c, v));
                    if header.symmetric && r != c {
                        entries.push((c, r, v));
                    }
                }
                Layout::Array => {
                    let v = parse_number::<f64>(toks.next(), lineno, "value")?;
                    if dense.len() >= count {
                        return parse_err(lineno, "more values than declared");
                    }
                    dense.push(v);
                }
            },
        }
    }
    let Some((rows, cols, count)) = size else {
        return parse_err(last_line, "missing size line");
    };
    let read = match header.layout {
        Layout::Coordinate => raw_entries,
        Layout::Array => dense.len(),
    };
    if read != count {
        return parse_err(last_line, format!("declared {count} entries but found {read}"));
    }
    Ok(Body { header, rows, cols, entries, dense })
}

/// Reads a coordinate-format Matrix Market file into both layouts.
/// Symmetric storage is expanded, pattern entries become 1.0 and duplicate
/// coordinates are summed.
pub fn read_matrix_market<T: Scalar>(reader: impl BufRead) -> Result<DualMatrix<T>> {
    let body = read_body(reader)?;
    if body.header.layout != Layout::Coordinate {
        return parse_err(1, "matrices must use the coordinate format");
    }
    if body.rows == 0 || body.cols == 0 {
        return parse_err(2, "matrix has zero rows or columns");
    }
    let trips: Vec<(usize, usize, T)> =
        body.entries.into_iter().map(|(r, c, v)| (r, c, T::from_f64_lossy(v))).collect();
    Ok(DualMatrix::from_csr(CsrMatrix::from_triplets(body.rows, body.cols, &trips)?))
}

pub fn load_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<DualMatrix<T>> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// A vector file: `n x 1` (or `1 x n`) coordinate data gives a sparse
/// vector, array data gives a dense one.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorFile<T> {
    Dense(DenseVector<T>),
    Sparse(SparseVector<T>),
}

pub fn load_vector_market<T: Scalar>(path: impl AsRef<Path>) -> Result<VectorFile<T>> {
    let body = read_body(BufReader::new(File::open(path)?))?;
    if body.rows != 1 && body.cols != 1 {
        return parse_err(2, format!("vector file must be n x 1 or 1 x n, got {}x{}", body.rows, body.cols));
    }
    let len = body.rows.max(body.cols);
    match body.header.layout {
        Layout::Array => {
            Ok(VectorFile::Dense(DenseVector::new(body.dense.into_iter().map(T::from_f64_lossy).collect())))
        }
        Layout::Coordinate => {
            let mut pairs: Vec<(usize, f64)> =
                body.entries.into_iter().map(|(r, c, v)| (if body.cols == 1 { r } else { c }, v)).collect();
            pairs.sort_by_key(|p| p.0);
            let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
            let mut values: Vec<T> = Vec::with_capacity(pairs.len());
            for (i, v) in pairs {
                if indices.last() == Some(&i) {
                    *values.last_mut().expect("paired with index") += T::from_f64_lossy(v);
                } else {
                    indices.push(i);
                    values.push(T::from_f64_lossy(v));
                }
            }
            Ok(VectorFile::Sparse(SparseVector::new(len, indices, values)?))
        }
    }
}

/// Writes the canonical form: general real coordinate, row-major order,
/// values in shortest round-trip exponent notation.
pub fn write_matrix_market<T: Scalar>(m: &CsrMatrix<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(out, "{} {} {:e}", r + 1, c + 1, v.as_f64())?;
    }
    Ok(())
}

pub fn save_matrix_market<T: Scalar>(m: &CsrMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_sparse_vector_market<T: Scalar>(x: &SparseVector<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} 1 {}", x.len(), x.nnz())?;
    for (i, v) in x.iter() {
        writeln!(out, "{} 1 {:e}", i + 1, v.as_f64())?;
    }
    Ok(())
}
