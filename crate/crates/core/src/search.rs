//! Sweeps the encodings of one operand and checks every run computes the
//! same tensor.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::encoding::{enumerate_encodings, Encoding, TensorType};
use crate::error::{Error, Result};
use crate::exec::{bind_inputs, run_kernel, Tensor};
use crate::expr::Kernel;
use crate::storage::CooTensor;

pub const CSV_HEADER: &str = "levels,ordering,ptr,idx,opt,time_ms,checksum";

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Checksum(String),
    /// The data does not fit the encoding's bit widths.
    Overflow,
    /// The kernel cannot be compiled with this encoding, e.g. an order
    /// conflict with another operand.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub encoding: Encoding,
    pub opt: String,
    pub time_ms: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub operand: String,
    pub rows: Vec<SearchRow>,
}

/// Encoding-independent digest of a result: SHA-256 over the shape and the
/// nonzero entries in lexicographic coordinate order. Negative zero hashes
/// like zero.
pub fn checksum(t: &Tensor) -> String {
    checksum_coo(&t.to_coo())
}

pub fn checksum_coo(coo: &CooTensor) -> String {
    let mut entries = coo.nonzero_entries();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut h = Sha256::new();
    h.update((coo.rank() as u64).to_le_bytes());
    for &n in coo.shape() {
        h.update((n as u64).to_le_bytes());
    }
    for (c, v) in entries {
        for x in c {
            h.update((x as u64).to_le_bytes());
        }
        let v = if v == 0.0 { 0.0 } else { v };
        h.update(v.to_bits().to_le_bytes());
    }
    let mut out = String::with_capacity(64);
    for b in h.finalize() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Runs `k` once per encoding of `operand`, other tensors keeping their
/// declared types. Runs happen in parallel; rows follow enumeration order.
pub fn search(
    k: &Kernel,
    operand: &str,
    inputs: &HashMap<String, CooTensor>,
    include_bitwidths: bool,
) -> Result<SearchReport> {
    let declared = k.tensor(operand)?.clone();
    if declared.rank() == 0 {
        return Err(Error::Unsupported(format!(
            "`{operand}` is a scalar and has no encodings"
        )));
    }
    let encodings = enumerate_encodings(declared.rank(), include_bitwidths);
    let rows = encodings
        .into_par_iter()
        .map(|enc| {
            let ttype = TensorType::new(declared.shape().to_vec(), Some(enc.clone()))?;
            let variant = k.with_tensor_type(operand, ttype)?;
            let start = Instant::now();
            let outcome = match bind_inputs(&variant, inputs).and_then(|b| run_kernel(&variant, &b))
            {
                Ok(t) => Outcome::Checksum(checksum(&t)),
                Err(Error::BitWidthOverflow { .. }) => Outcome::Overflow,
                Err(e @ (Error::OrderConflict(_) | Error::Unsupported(_))) => {
                    Outcome::Rejected(e.to_string())
                }
                Err(e) => return Err(e),
            };
            Ok(SearchRow {
                encoding: enc,
                opt: "default".into(),
                time_ms: start.elapsed().as_secs_f64() * 1e3,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchReport {
        operand: operand.to_string(),
        rows,
    })
}

impl SearchReport {
    /// Checksums of the rows that ran.
    pub fn checksums(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter_map(|r| match &r.outcome {
                Outcome::Checksum(c) => Some(c.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Fails unless at least one encoding ran and all of them agree.
    pub fn verify(&self) -> Result<()> {
        let sums = self.checksums();
        let Some(first) = sums.first() else {
            return Err(Error::Unsupported(format!(
                "no encoding of `{}` could be run",
                self.operand
            )));
        };
        match self
            .rows
            .iter()
            .find(|r| matches!(&r.outcome, Outcome::Checksum(c) if c != first))
        {
            Some(r) => Err(Error::Unsupported(format!(
                "result under {} differs from the first encoding",
                r.encoding
            ))),
            None => Ok(()),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let check = match &r.outcome {
                Outcome::Checksum(c) => c.as_str(),
                Outcome::Overflow => "overflow",
                Outcome::Rejected(_) => "rejected",
            };
            let e = &r.encoding;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.3},{check}",
                e.levels_label(),
                e.ordering_label(),
                e.pointer_bit_width(),
                e.index_bit_width(),
                r.opt,
                r.time_ms
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_kernel;
    use crate::fixtures;

    #[test]
    fn checksum_ignores_layout_and_signed_zero() {
        let a = fixtures::matrix_a();
        let csr = Tensor::from_coo(
            &a,
            &TensorType::new(vec![3, 4], Some(Encoding::csr())).unwrap(),
        )
        .unwrap();
        let dense = Tensor::from_coo(&a, &TensorType::dense(vec![3, 4]).unwrap()).unwrap();
        assert_eq!(checksum(&csr), checksum(&dense));
        let z = CooTensor::from_entries(vec![2], [([0], -0.0)]).unwrap();
        assert_eq!(checksum_coo(&z), checksum_coo(&CooTensor::new(vec![2])));
        assert_ne!(checksum_coo(&a), checksum_coo(&CooTensor::new(vec![3, 4])));
    }

    #[test]
    fn vector_sweep_has_two_rows() {
        let k =
            parse_kernel("tensor a(16) format(compressed)\ntensor x(16)\nx(i) = 3 * a(i)").unwrap();
        let inputs = HashMap::from([("a".to_string(), fixtures::vector_x())]);
        let r = search(&k, "a", &inputs, false).unwrap();
        assert_eq!(r.rows.len(), 2);
        r.verify().unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn narrow_widths_are_marked() {
        let k =
            parse_kernel("tensor a(300) format(compressed)\ntensor x(300)\nx(i) = a(i)").unwrap();
        let far = CooTensor::from_entries(vec![300], [([299], 1.0)]).unwrap();
        let r = search(&k, "a", &HashMap::from([("a".to_string(), far)]), true).unwrap();
        assert!(r.rows.iter().any(|row| row.outcome == Outcome::Overflow));
        assert!(r.to_csv().contains(",overflow"));
        r.verify().unwrap();
    }
}
