//! FROSTT coordinate files, plain and extended.
//!
//! Plain files hold one `i1 ... id value` line per element (1-based) and no
//! size information; the shape is inferred as the largest coordinate seen
//! per dimension. Extended files start with a `rank nnz` line followed by a
//! line of `rank` extents. Lines starting with `#` or `%` are comments.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::storage::CooTensor;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(no, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#') && !t.starts_with('%')).then_some((no + 1, t))
    })
}

/// Whether `text` starts with an extended size header.
pub fn has_extended_header(text: &str) -> bool {
    let mut lines = data_lines(text);
    let Some((_, first)) = lines.next() else {
        return false;
    };
    let head: Vec<&str> = first.split_whitespace().collect();
    let [r, n] = head[..] else {
        return false;
    };
    let (Ok(rank), Ok(nnz)) = (r.parse::<usize>(), n.parse::<usize>()) else {
        return false;
    };
    let Some((_, second)) = lines.next() else {
        return false;
    };
    let extents: Vec<&str> = second.split_whitespace().collect();
    if rank == 0 || extents.len() != rank || extents.iter().any(|e| e.parse::<usize>().is_err()) {
        return false;
    }
    match lines.next() {
        Some((_, third)) => third.split_whitespace().count() == rank + 1,
        None => nnz == 0,
    }
}

pub fn parse_extended_frostt(text: &str) -> Result<CooTensor> {
    let mut lines = data_lines(text);
    let (no, head) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `rank nnz` header"))?;
    let head = parse_usizes(head, no)?;
    let [rank, nnz] = head[..] else {
        return Err(parse_err(no, "header must be `rank nnz`"));
    };
    let (no, ext) = lines
        .next()
        .ok_or_else(|| parse_err(no + 1, "missing extents line"))?;
    let shape = parse_usizes(ext, no)?;
    if shape.len() != rank {
        return Err(Error::ShapeMismatch(format!(
            "header declares rank {rank} but {} extents are given",
            shape.len()
        )));
    }
    let mut coo = CooTensor::with_capacity(shape.clone(), nnz);
    let mut coords = vec![0; rank];
    for (no, line) in lines {
        let value = parse_entry(line, no, &mut coords)?;
        if let Some(d) = (0..rank).find(|&d| coords[d] >= shape[d]) {
            return Err(Error::ShapeMismatch(format!(
                "line {no}: coordinate {} exceeds extent {} of dimension {d}",
                coords[d] + 1,
                shape[d]
            )));
        }
        coo.push(&coords, value)?;
    }
    if coo.len() != nnz {
        return Err(Error::ShapeMismatch(format!(
            "header announces {nnz} entries, file holds {}",
            coo.len()
        )));
    }
    coo.normalize();
    Ok(coo)
}

pub fn parse_frostt(text: &str) -> Result<CooTensor> {
    let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut rank = None;
    for (no, line) in data_lines(text) {
        let r = line.split_whitespace().count().saturating_sub(1);
        if r == 0 {
            return Err(parse_err(no, "entry needs coordinates and a value"));
        }
        match rank {
            None => rank = Some(r),
            Some(prev) if prev != r => {
                return Err(parse_err(
                    no,
                    &format!("expected {prev} coordinates, found {r}"),
                ))
            }
            _ => {}
        }
        let mut coords = vec![0; r];
        let v = parse_entry(line, no, &mut coords)?;
        entries.push((coords, v));
    }
    let rank =
        rank.ok_or_else(|| parse_err(1, "no entries; plain FROSTT needs data to infer a shape"))?;
    let mut shape = vec![0; rank];
    for (c, _) in &entries {
        for d in 0..rank {
            shape[d] = shape[d].max(c[d] + 1);
        }
    }
    let coo = CooTensor::from_entries(shape, entries)?;
    Ok(coo.normalized())
}

/// Extended FROSTT text for a coordinate list, entries in lexicographic order.
pub fn format_extended_frostt(coo: &CooTensor) -> String {
    let coo = coo.clone().normalized();
    let mut out = String::new();
    out.push_str("# extended FROSTT: `rank nnz`, extents, then 1-based `i1 .. id value` lines\n");
    let _ = writeln!(out, "{} {}", coo.rank(), coo.len());
    let extents: Vec<String> = coo.shape().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "{}", extents.join(" "));
    for (c, v) in coo.entries() {
        for &x in c {
            let _ = write!(out, "{} ", x + 1);
        }
        let _ = writeln!(out, "{}", format_value(v));
    }
    out
}

/// Shortest decimal text that parses back to the same value.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn parse_entry(line: &str, no: usize, coords: &mut [usize]) -> Result<f64> {
    let mut it = line.split_whitespace();
    for c in coords.iter_mut() {
        let tok = it
            .next()
            .ok_or_else(|| parse_err(no, "too few coordinates"))?;
        let x: usize = tok
            .parse()
            .map_err(|_| parse_err(no, &format!("bad coordinate `{tok}`")))?;
        if x == 0 {
            return Err(parse_err(no, "coordinates are 1-based"));
        }
        *c = x - 1;
    }
    let tok = it.next().ok_or_else(|| parse_err(no, "missing value"))?;
    let v = tok
        .parse::<f64>()
        .map_err(|_| parse_err(no, &format!("bad value `{tok}`")))?;
    if let Some(extra) = it.next() {
        return Err(parse_err(no, &format!("unexpected token `{extra}`")));
    }
    Ok(v)
}

fn parse_usizes(line: &str, no: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(no, &format!("expected an integer, found `{t}`")))
        })
        .collect()
}

fn parse_err(line: usize, reason: &str) -> Error {
    Error::Parse {
        line,
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn matrix_a_layout() {
        let text = format_extended_frostt(&matrix_a());
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "2 3");
        assert_eq!(lines[2], "3 4");
        assert_eq!(&lines[3..], &["1 1 1", "1 4 2", "3 1 3"]);
        assert_eq!(parse_extended_frostt(&text).unwrap(), matrix_a());
        assert!(has_extended_header(&text));
    }

    #[test]
    fn empty_vector() {
        let text = format_extended_frostt(&CooTensor::new(vec![5]));
        let lines: Vec<_> = text.lines().skip(1).collect();
        assert_eq!(lines, vec!["1 0", "5"]);
        let back = parse_extended_frostt(&text).unwrap();
        assert_eq!(back.shape(), &[5]);
        assert!(back.is_empty());
        assert!(has_extended_header(&text));
    }

    #[test]
    fn tensor_t_in_lex_order() {
        let text = format_extended_frostt(&tensor_t());
        let entries: Vec<_> = text.lines().skip(3).collect();
        assert_eq!(
            entries,
            vec!["1 1 1 1", "3 1 1 2", "3 1 3 3", "3 2 3 4", "3 2 4 5"]
        );
    }

    #[test]
    fn plain_frostt_infers_shape() {
        let coo = parse_frostt("# c\n1 1 1.0\n3 2 2.5\n").unwrap();
        assert_eq!(coo.shape(), &[3, 2]);
        assert!(!has_extended_header("1 1 1.0\n3 2 2.5\n"));
        assert!(!has_extended_header("2 3.0\n5 2.0\n"));
    }

    #[test]
    fn extended_errors() {
        assert!(matches!(
            parse_extended_frostt("2 1\n3 4\n4 1 1.0\n"),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            parse_extended_frostt("2 2\n3 4\n1 1 1.0\n"),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            parse_extended_frostt("2 1\n3 4\n1 x 1.0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn value_text_round_trips() {
        for v in [0.1, 1.0, -2.5, 1e-300, 6.02e23, 1.0 / 3.0] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_value(2.0), "2");
    }
}
