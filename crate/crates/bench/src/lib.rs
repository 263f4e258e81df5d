//! Inputs and compiled kernels shared by the criterion benches.

use std::collections::HashMap;

use sparsec_core::exec::{bind_inputs, Tensor};
use sparsec_core::oracle::{generate, GeneratorKind, GeneratorSpec};
use sparsec_core::{parse_kernel, CooTensor, Kernel};

pub fn uniform(shape: Vec<usize>, density: f64, seed: u64) -> CooTensor {
    generate(&GeneratorSpec::new(
        GeneratorKind::UniformRandom { density, seed },
        shape,
    ))
}

pub fn row_band(n: usize, rows: usize, seed: u64) -> CooTensor {
    generate(&GeneratorSpec::new(
        GeneratorKind::RowBand { rows, seed },
        vec![n, n],
    ))
}

/// A parsed kernel with its inputs already packed.
pub struct Prepared {
    pub kernel: Kernel,
    pub inputs: HashMap<String, Tensor>,
}

pub fn prepare(text: &str, inputs: Vec<(&str, CooTensor)>) -> Prepared {
    let kernel = parse_kernel(text).expect("bench kernels parse");
    let raw: HashMap<String, CooTensor> = inputs
        .into_iter()
        .map(|(n, c)| (n.to_string(), c))
        .collect();
    let inputs = bind_inputs(&kernel, &raw).expect("bench inputs bind");
    Prepared { kernel, inputs }
}

pub fn spmspm(n: usize, density: f64) -> Prepared {
    let csr = "format(dense,compressed)";
    prepare(
        &format!("tensor A({n},{n}) {csr}\ntensor B({n},{n}) {csr}\ntensor C({n},{n}) {csr}\nC(i,j) = A(i,k) * B(k,j)"),
        vec![("A", uniform(vec![n, n], density, 1)), ("B", uniform(vec![n, n], density, 2))],
    )
}

/// SpMV over a row-band matrix with the given encoding clause.
pub fn spmv(n: usize, rows: usize, encoding: &str) -> Prepared {
    prepare(
        &format!(
            "tensor A({n},{n}) {encoding}\ntensor b({n})\ntensor x({n})\nx(i) = A(i,j) * b(j)"
        ),
        vec![("A", row_band(n, rows, 3)), ("b", uniform(vec![n], 1.0, 4))],
    )
}

pub fn mttkrp(n: usize, encoding: &str) -> Prepared {
    let r = 8;
    prepare(
        &format!(
            "tensor B({n},{n},{n}) {encoding}\ntensor C({n},{r})\ntensor D({n},{r})\ntensor A({n},{r})\n\
             A(i,j) = B(i,k,l) * D(l,j) * C(k,j)"
        ),
        vec![
            ("B", uniform(vec![n, n, n], 0.01, 5)),
            ("C", uniform(vec![n, r], 1.0, 6)),
            ("D", uniform(vec![n, r], 1.0, 7)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsec_core::exec::run_kernel;

    #[test]
    fn fixtures_run() {
        for p in [
            spmspm(32, 0.05),
            spmv(64, 4, "format(compressed,dense)"),
            mttkrp(8, "format(dense,compressed,compressed)"),
        ] {
            run_kernel(&p.kernel, &p.inputs).unwrap();
        }
    }
}
