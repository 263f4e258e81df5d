//! Matrix Market coordinate files.
//!
//! Supported: `coordinate` with field `real`, `integer` or `pattern` and
//! symmetry `general` or `symmetric`. Symmetric files list the lower
//! triangle; each off-diagonal entry is mirrored.

use crate::error::{Error, Result};
use crate::storage::CooTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

pub fn parse_matrix_market(text: &str) -> Result<CooTensor> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = banner
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, &format!("unsupported format `{}`", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        "complex" => return Err(Error::UnsupportedField("complex".into())),
        other => return Err(parse_err(1, &format!("unsupported field `{other}`"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, &format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_no, size_line) = data
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(size_no + 1, "size line must hold three integers"))?;
    let [rows, cols, nnz] = size[..] else {
        return Err(parse_err(size_no + 1, "size line must hold three integers"));
    };
    if symmetric && rows != cols {
        return Err(Error::ShapeMismatch(format!(
            "symmetric matrix must be square, got {rows}x{cols}"
        )));
    }

    let mut coo = CooTensor::with_capacity(vec![rows, cols], if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0;
    for (no, line) in data {
        let line_no = no + 1;
        let mut it = line.split_whitespace();
        let mut coord = |name: &str, extent: usize| -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| parse_err(line_no, &format!("missing {name}")))?;
            let c: usize = tok
                .parse()
                .map_err(|_| parse_err(line_no, &format!("bad {name} `{tok}`")))?;
            if c == 0 || c > extent {
                return Err(parse_err(
                    line_no,
                    &format!("{name} {c} out of range 1..={extent}"),
                ));
            }
            Ok(c - 1)
        };
        let i = coord("row", rows)?;
        let j = coord("column", cols)?;
        let value = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let tok = it
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing value"))?;
                if field == Field::Integer {
                    tok.parse::<i64>()
                        .map(|v| v as f64)
                        .map_err(|_| parse_err(line_no, &format!("bad integer `{tok}`")))?
                } else {
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(line_no, &format!("bad value `{tok}`")))?
                }
            }
        };
        if let Some(extra) = it.next() {
            return Err(parse_err(line_no, &format!("unexpected token `{extra}`")));
        }
        coo.push(&[i, j], value)?;
        if symmetric && i != j {
            coo.push(&[j, i], value)?;
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::ShapeMismatch(format!(
            "header announces {nnz} entries, file holds {seen}"
        )));
    }
    coo.normalize();
    Ok(coo)
}

fn parse_err(line: usize, reason: &str) -> Error {
    Error::Parse {
        line,
        reason: reason.to_string(),
    }
}
