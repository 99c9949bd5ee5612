//! MatrixMarket coordinate files.
//!
//! Reading supports `real`, `integer` and `pattern` fields with `general` or
//! `symmetric` storage. Pattern entries get the value 1.0, symmetric files
//! are mirrored to full storage, and duplicate coordinates are summed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = BufReader::new(File::open(path)?);
    parse_matrix_market(reader, &path.display().to_string())
}

/// Parses MatrixMarket text; `source` is only used in error messages.
pub fn parse_matrix_market<R: BufRead>(reader: R, source: &str) -> Result<CsrMatrix> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };

    let mut lines = reader.lines().enumerate();
    let (field, symmetry) = match lines.next() {
        Some((_, header)) => parse_header(&header?)?,
        None => return Err(parse_err(1, "empty file".into())),
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut read_entries = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let Some((n_rows, n_cols, declared)) = dims else {
            let mut next = |what: &str| -> Result<usize> {
                tokens
                    .next()
                    .ok_or_else(|| parse_err(lineno, format!("missing {what} in size line")))?
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad {what}: {e}")))
            };
            let size = (
                next("row count")?,
                next("column count")?,
                next("entry count")?,
            );
            entries.reserve(if symmetry == Symmetry::Symmetric {
                2 * size.2
            } else {
                size.2
            });
            dims = Some(size);
            continue;
        };

        if read_entries == declared {
            return Err(parse_err(
                lineno,
                format!("more entries than the {declared} declared"),
            ));
        }
        let mut index = |what: &str, bound: usize| -> Result<usize> {
            let v: usize = tokens
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {what} index")))?
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad {what} index: {e}")))?;
            if v == 0 || v > bound {
                return Err(parse_err(
                    lineno,
                    format!("{what} index {v} outside 1..={bound}"),
                ));
            }
            Ok(v - 1)
        };
        let r = index("row", n_rows)?;
        let c = index("column", n_cols)?;
        let value = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let tok = tokens
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing value".into()))?;
                tok.parse::<f64>()
                    .map_err(|e| parse_err(lineno, format!("bad value {tok:?}: {e}")))?
            }
        };
        entries.push((r, c, value));
        if symmetry == Symmetry::Symmetric && r != c {
            entries.push((c, r, value));
        }
        read_entries += 1;
    }

    let (n_rows, n_cols, declared) =
        dims.ok_or_else(|| parse_err(0, "missing size line".into()))?;
    if read_entries != declared {
        return Err(parse_err(
            0,
            format!("declared {declared} entries but found {read_entries}"),
        ));
    }

    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut summed: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match summed.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => summed.push((r, c, v)),
        }
    }
    Ok(CsrMatrix::from_sorted_entries(n_rows, n_cols, summed))
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!(
            "expected '%%MatrixMarket matrix ...', got {line:?}"
        )));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(format!(
            "only coordinate format is supported, got {}",
            tokens[2]
        )));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "unsupported field type {other}"
            )))
        }
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "unsupported symmetry {other}"
            )))
        }
    };
    Ok((field, symmetry))
}

/// Writes `a` as `coordinate real general` with shortest round-trip float formatting.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<W: Write>(w: &mut W, a: &CsrMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
    }
    Ok(())
}
