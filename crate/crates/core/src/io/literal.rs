//! Constant literals: nested dense lists and COO-style sparse constants.
//!
//! ```text
//! [1.0, 0.0, 2.0]                    dense, shape inferred
//! dense<[[1, 2], [3, 4]]>            optional wrapper
//! sparse<[[0, 0], [1, 2]], [1.0, 2.0]> : 10x8
//! sparse<[[0, 0]], [1.0]> : tensor<10x8xf64>
//! ```

use crate::error::{Error, Result};
use crate::storage::{CooTensor, DenseTensor};

#[derive(Debug)]
enum Nested {
    Num(f64),
    List(Vec<Nested>),
}

struct Cursor<'a> {
    s: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor {
            s: s.as_bytes(),
            at: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.at).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        if self.s[self.at..].starts_with(w.as_bytes()) {
            self.at += w.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.at;
        while self.at < self.s.len()
            && (self.s[self.at].is_ascii_alphanumeric() || b"+-.".contains(&self.s[self.at]))
        {
            self.at += 1;
        }
        let tok = std::str::from_utf8(&self.s[start..self.at]).unwrap();
        tok.parse::<f64>()
            .map_err(|_| self.err(&format!("bad number `{tok}`")))
    }

    fn nested(&mut self) -> Result<Nested> {
        if self.eat(b'[') {
            let mut items = Vec::new();
            if !self.eat(b']') {
                loop {
                    items.push(self.nested()?);
                    if self.eat(b']') {
                        break;
                    }
                    self.expect(b',')?;
                }
            }
            Ok(Nested::List(items))
        } else {
            Ok(Nested::Num(self.number()?))
        }
    }

    fn rest(&mut self) -> &'a str {
        self.skip_ws();
        let r = std::str::from_utf8(&self.s[self.at..]).unwrap();
        self.at = self.s.len();
        r
    }

    fn err(&self, reason: &str) -> Error {
        Error::Parse {
            line: 1,
            reason: format!("{reason} at offset {}", self.at),
        }
    }
}

fn flatten(n: &Nested, depth: usize, shape: &mut Vec<usize>, out: &mut Vec<f64>) -> Result<()> {
    match n {
        Nested::Num(v) => {
            if depth != shape.len() {
                return Err(ragged());
            }
            out.push(*v);
        }
        Nested::List(items) => {
            if depth == shape.len() {
                if !out.is_empty() {
                    return Err(ragged());
                }
                shape.push(items.len());
            } else if shape[depth] != items.len() {
                return Err(ragged());
            }
            for it in items {
                flatten(it, depth + 1, shape, out)?;
            }
        }
    }
    Ok(())
}

fn ragged() -> Error {
    Error::Parse {
        line: 1,
        reason: "ragged dense literal".into(),
    }
}

pub fn read_dense_literal(text: &str) -> Result<DenseTensor> {
    let mut c = Cursor::new(text);
    let wrapped = c.eat_word("dense");
    if wrapped {
        c.expect(b'<')?;
    }
    let n = c.nested()?;
    if wrapped {
        c.expect(b'>')?;
    }
    if !c.rest().is_empty() {
        return Err(c.err("trailing input"));
    }
    let mut shape = Vec::new();
    let mut data = Vec::new();
    flatten(&n, 0, &mut shape, &mut data)?;
    DenseTensor::from_data(shape, data)
}

pub fn read_sparse_literal(text: &str) -> Result<CooTensor> {
    let mut c = Cursor::new(text);
    if !c.eat_word("sparse") {
        return Err(c.err("expected `sparse<`"));
    }
    c.expect(b'<')?;
    let indices = c.nested()?;
    c.expect(b',')?;
    let values = c.nested()?;
    c.expect(b'>')?;
    c.expect(b':')?;
    let shape = parse_shape(c.rest())?;

    let Nested::List(coords) = indices else {
        return Err(c.err("indices must be a list"));
    };
    let Nested::List(values) = values else {
        return Err(c.err("values must be a list"));
    };
    if coords.len() != values.len() {
        return Err(Error::LengthMismatch {
            coords: coords.len(),
            values: values.len(),
        });
    }
    let mut coo = CooTensor::with_capacity(shape, coords.len());
    for (coord, value) in coords.iter().zip(&values) {
        let (Nested::List(cs), Nested::Num(v)) = (coord, value) else {
            return Err(c.err("each index must be a list and each value a number"));
        };
        let cs = cs
            .iter()
            .map(|x| match x {
                Nested::Num(f) if *f >= 0.0 && f.fract() == 0.0 => Ok(*f as usize),
                _ => Err(c.err("indices must be non-negative integers")),
            })
            .collect::<Result<Vec<_>>>()?;
        coo.push(&cs, *v)?;
    }
    Ok(coo)
}

/// Accepts `10x8` or `tensor<10x8xf64>`.
fn parse_shape(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    let t = t
        .strip_prefix("tensor<")
        .and_then(|r| r.strip_suffix('>'))
        .unwrap_or(t);
    let parts: Vec<&str> = t.split('x').collect();
    let dims = match parts.last() {
        Some(p) if p.starts_with('f') => &parts[..parts.len() - 1],
        _ => &parts[..],
    };
    dims.iter()
        .map(|d| {
            d.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: 1,
                reason: format!("bad shape `{text}`"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_constant() {
        let text = "sparse<[[0, 0], [0, 7], [1, 2], [4, 2], [5, 3], [6, 4], [6, 6], [9, 7]],\n\
                    [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]> : tensor<10x8xf64>";
        let coo = read_sparse_literal(text).unwrap();
        assert_eq!(coo.shape(), &[10, 8]);
        assert_eq!(coo.len(), 8);
        assert_eq!(coo.coords(3), &[4, 2]);
        assert_eq!(coo.value(3), 4.0);
        assert_eq!(
            read_sparse_literal("sparse<[[1]], [2.5]> : 4")
                .unwrap()
                .shape(),
            &[4]
        );
    }

    #[test]
    fn length_mismatch() {
        let text = "sparse<[[0, 0], [1, 1], [2, 2]], [1.0, 2.0]> : 3x3";
        assert_eq!(
            read_sparse_literal(text),
            Err(Error::LengthMismatch {
                coords: 3,
                values: 2
            })
        );
    }

    #[test]
    fn dense_literals() {
        let t = read_dense_literal("[1.0, 0.0, 2.0]").unwrap();
        assert_eq!(t.shape(), &[3]);
        assert_eq!(t.data(), &[1.0, 0.0, 2.0]);
        let m = read_dense_literal("dense<[[1, 2], [3, 4], [5, 6]]>").unwrap();
        assert_eq!(m.shape(), &[3, 2]);
        assert!(read_dense_literal("[[1, 2], [3]]").is_err());
        assert!(read_dense_literal("[1, 2").is_err());
    }
}
