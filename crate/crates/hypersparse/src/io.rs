//! File formats: Matrix Market coordinate files and plain index-vector files.
//!
//! Matrix Market is 1-based on disk per the standard; everything else in this
//! crate (including index-vector files) is 0-based. Values are written with
//! Rust's shortest round-trip float formatting, so write/read is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::csc::CscMatrix;
use crate::error::{Error, Result};
use crate::indexing::IndexVector;
use crate::semiring::PlusTimes;
use crate::triples::TripleList;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Reads a real, general, coordinate-format Matrix Market file.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CscMatrix<f64>> {
    let file = File::open(path)?;
    read_matrix_market_from(BufReader::new(file))
}

/// As [`read_matrix_market`] from any buffered reader.
pub fn read_matrix_market_from<R: BufRead>(reader: R) -> Result<CscMatrix<f64>> {
    let mut lines = reader.lines().enumerate();

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let expected: Vec<&str> = HEADER.split_whitespace().collect();
    if fields != expected {
        return Err(Error::Parse {
            line: line_no + 1,
            msg: format!("expected header `{HEADER}`, got `{}`", header.trim()),
        });
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triples: Option<TripleList<f64>> = None;
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut parts = text.split_whitespace();
        if dims.is_none() {
            let (r, c, nnz) = parse_three(&mut parts, line_no)?;
            dims = Some((r, c, nnz));
            triples = Some(TripleList::new(r, c));
            continue;
        }
        let t = triples.as_mut().unwrap();
        let row: usize = parse_field(parts.next(), line_no, "row index")?;
        let col: usize = parse_field(parts.next(), line_no, "column index")?;
        let val: f64 = parse_field(parts.next(), line_no, "value")?;
        if row == 0 || col == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "coordinate indices are 1-based; found 0".into(),
            });
        }
        t.push(row - 1, col - 1, val).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        seen += 1;
    }
    let (_, _, nnz) = dims.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing size line".into(),
    })?;
    if seen != nnz {
        return Err(Error::Parse {
            line: 0,
            msg: format!("size line promises {nnz} entries, file has {seen}"),
        });
    }
    CscMatrix::from_triples(&triples.unwrap(), &PlusTimes)
}

fn parse_three<'a>(
    parts: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<(usize, usize, usize)> {
    Ok((
        parse_field(parts.next(), line, "row count")?,
        parse_field(parts.next(), line, "column count")?,
        parse_field(parts.next(), line, "nonzero count")?,
    ))
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let text = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    text.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from `{text}`"),
    })
}

/// Writes a matrix in coordinate format, 1-based, full round-trip precision.
pub fn write_matrix_market(a: &CscMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_matrix_market_to(a, &mut BufWriter::new(file))
}

/// As [`write_matrix_market`] to any writer.
pub fn write_matrix_market_to<W: Write>(a: &CscMatrix<f64>, out: &mut W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for (r, c, v) in a.iter_entries() {
        writeln!(out, "{} {} {}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Reads a whitespace-separated list of 0-based indices.
pub fn read_index_vector(path: impl AsRef<Path>) -> Result<IndexVector> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        for tok in line.split_whitespace() {
            let v: usize = tok.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("cannot parse index from `{tok}`"),
            })?;
            entries.push(v);
        }
    }
    Ok(IndexVector::new(entries))
}

/// Writes indices one per line, 0-based.
pub fn write_index_vector(v: &IndexVector, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    for &e in v.entries() {
        writeln!(out, "{e}")?;
    }
    Ok(())
}
