//! Shared helpers: random kernels, binding and comparison against the
//! dense reference.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sparsec_core::encoding::enumerate_encodings;
use sparsec_core::exec::{bind_inputs, run_kernel, Tensor};
use sparsec_core::oracle::{dense_eval, generate, GeneratorKind, GeneratorSpec};
use sparsec_core::{CooTensor, DenseTensor, Encoding, Error, Kernel};

pub struct Case {
    pub text: String,
    pub kernel: Kernel,
    pub inputs: HashMap<String, CooTensor>,
}

const VARS: [&str; 4] = ["i", "j", "k", "l"];

fn pick_vars(rng: &mut ChaCha8Rng, rank: usize) -> Vec<&'static str> {
    let mut v = VARS.to_vec();
    v.shuffle(rng);
    v.truncate(rank);
    v
}

fn random_encoding(rng: &mut ChaCha8Rng, rank: usize) -> Option<Encoding> {
    if rank == 0 || rng.gen_bool(0.25) {
        return None;
    }
    let widths = rng.gen_bool(0.2);
    let all = enumerate_encodings(rank, widths);
    Some(all[rng.gen_range(0..all.len())].clone())
}

fn clause(e: &Option<Encoding>) -> String {
    match e {
        Some(e) => format!(" {e}"),
        None => String::new(),
    }
}

/// Random kernel text: up to three operands of rank at most three over
/// extents at most eight, combined with `+`, `-` and `*`.
pub fn random_text(rng: &mut ChaCha8Rng) -> String {
    let extents: Vec<usize> = (0..VARS.len()).map(|_| rng.gen_range(1..=8)).collect();
    let extent = |v: &str| extents[VARS.iter().position(|x| *x == v).unwrap()];
    let n = rng.gen_range(1..=3);
    let names = ["A", "B", "C"];
    let mut decls = Vec::new();
    let mut accesses = Vec::new();
    let mut used: Vec<&str> = Vec::new();
    for name in &names[..n] {
        let rank = rng.gen_range(0..=3);
        let vars = pick_vars(rng, rank);
        let shape: Vec<String> = vars.iter().map(|v| extent(v).to_string()).collect();
        let enc = random_encoding(rng, rank);
        decls.push(format!(
            "tensor {name}({}){}",
            shape.join(","),
            clause(&enc)
        ));
        accesses.push(format!("{name}({})", vars.join(",")));
        used.extend(&vars);
    }
    // Random binary tree over the accesses, left to right.
    let mut expr = accesses[0].clone();
    for a in &accesses[1..] {
        let op = ["+", "-", "*"][rng.gen_range(0..3)];
        expr = if rng.gen_bool(0.5) {
            format!("({expr}) {op} {a}")
        } else {
            format!("{a} {op} ({expr})")
        };
    }
    if rng.gen_bool(0.2) {
        expr = format!("{} * ({expr})", rng.gen_range(2..5));
    }
    if rng.gen_bool(0.1) {
        expr = format!("-({expr})");
    }
    let out_rank = rng.gen_range(0..=3);
    let out_vars = pick_vars(rng, out_rank);
    let broadcast: Vec<&str> = out_vars
        .iter()
        .copied()
        .filter(|v| !used.contains(v))
        .collect();
    let shape: Vec<String> = out_vars.iter().map(|v| extent(v).to_string()).collect();
    let enc = random_encoding(rng, out_rank);
    decls.push(format!("tensor X({}){}", shape.join(","), clause(&enc)));
    if !broadcast.is_empty() {
        decls.push(format!("index {}", broadcast.join(",")));
    }
    let op = if rng.gen_bool(0.15) { "+=" } else { "=" };
    format!(
        "{}\nX({}) {op} {expr}\n",
        decls.join("\n"),
        out_vars.join(",")
    )
}

/// Random inputs for every tensor the kernel reads, with densities drawn
/// from a small set. Integer data uses values 1..=5.
pub fn random_inputs(
    rng: &mut ChaCha8Rng,
    k: &Kernel,
    integer: bool,
) -> HashMap<String, CooTensor> {
    let mut names = k.input_names();
    if k.op() == sparsec_core::expr::AssignOp::AddAssign && !names.contains(&k.lhs().tensor) {
        names.push(k.lhs().tensor.clone());
    }
    names
        .into_iter()
        .map(|name| {
            let shape = k.tensor(&name).unwrap().shape().to_vec();
            let density = [0.0, 0.1, 0.3, 0.6, 1.0][rng.gen_range(0..5)];
            let spec = GeneratorSpec::new(
                GeneratorKind::UniformRandom {
                    density,
                    seed: rng.gen(),
                },
                shape,
            );
            let mut coo = generate(&spec);
            if integer {
                coo = integerize(&coo);
            }
            (name, coo)
        })
        .collect()
}

/// Maps (0,1] values onto the integers 1..=5.
pub fn integerize(coo: &CooTensor) -> CooTensor {
    let mut out = CooTensor::new(coo.shape().to_vec());
    for (c, v) in coo.entries() {
        out.push(c, (v * 5.0).ceil()).unwrap();
    }
    out
}

/// Draws cases until one compiles and binds; kernels rejected for loop
/// order conflicts, unsupported shapes or narrow bit widths are redrawn.
pub fn random_case(rng: &mut ChaCha8Rng, integer: bool) -> (Case, Tensor) {
    loop {
        let text = random_text(rng);
        let kernel = sparsec_core::parse_kernel(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let inputs = random_inputs(rng, &kernel, integer);
        let bound = match bind_inputs(&kernel, &inputs) {
            Ok(b) => b,
            Err(Error::BitWidthOverflow { .. }) => continue,
            Err(e) => panic!("{e}\n{text}"),
        };
        match run_kernel(&kernel, &bound) {
            Ok(out) => {
                return (
                    Case {
                        text,
                        kernel,
                        inputs,
                    },
                    out,
                )
            }
            Err(
                Error::OrderConflict(_) | Error::Unsupported(_) | Error::BitWidthOverflow { .. },
            ) => continue,
            Err(e) => panic!("{e}\n{text}"),
        }
    }
}

pub fn oracle(case: &Case) -> DenseTensor {
    let dense: HashMap<String, DenseTensor> = case
        .inputs
        .iter()
        .map(|(n, c)| (n.clone(), DenseTensor::from_coo(c)))
        .collect();
    dense_eval(&case.kernel, &dense).unwrap()
}

/// Largest relative difference, measured against `max(1, |expected|)`.
pub fn max_rel_diff(got: &DenseTensor, expected: &DenseTensor) -> f64 {
    assert_eq!(got.shape(), expected.shape());
    got.data()
        .iter()
        .zip(expected.data())
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn bind(k: &Kernel, inputs: &[(&str, CooTensor)]) -> HashMap<String, Tensor> {
    let map: HashMap<String, CooTensor> = inputs
        .iter()
        .map(|(n, c)| (n.to_string(), c.clone()))
        .collect();
    bind_inputs(k, &map).unwrap()
}

/// Random tensor of the given rank with extents 1..=6 and real values,
/// including negative ones.
pub fn random_tensor(rng: &mut ChaCha8Rng, rank: usize) -> CooTensor {
    let shape: Vec<usize> = (0..rank).map(|_| rng.gen_range(1..=6)).collect();
    let density = rng.gen_range(0.0..1.0);
    let coo = generate(&GeneratorSpec::new(
        GeneratorKind::UniformRandom {
            density,
            seed: rng.gen(),
        },
        shape.clone(),
    ));
    let mut out = CooTensor::new(shape);
    for (c, v) in coo.entries() {
        let scale = [1.0, -1.0, 1e-7, 3e12][rng.gen_range(0..4)];
        out.push(c, v * scale).unwrap();
    }
    out
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub type Entries = Vec<(Vec<usize>, f64)>;

/// The Matrix Market fixtures with their expected nonzeros, 0-based.
pub fn mtx_fixtures() -> Vec<(&'static str, Vec<usize>, Entries)> {
    vec![
        (
            "general.mtx",
            vec![3, 4],
            vec![(vec![0, 0], 1.0), (vec![0, 3], 2.0), (vec![2, 0], 3.0)],
        ),
        (
            "symmetric.mtx",
            vec![3, 3],
            vec![
                (vec![0, 0], 4.0),
                (vec![0, 1], -1.5),
                (vec![1, 0], -1.5),
                (vec![1, 2], 2.0),
                (vec![2, 1], 2.0),
            ],
        ),
        (
            "pattern.mtx",
            vec![4, 4],
            vec![(vec![0, 1], 1.0), (vec![1, 0], 1.0), (vec![3, 3], 1.0)],
        ),
    ]
}

/// Stored and freshly emitted IR for a kernel under `tests/golden`.
pub fn golden(name: &str) -> (String, String) {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let kernel = std::fs::read_to_string(dir.join(format!("{name}.kernel"))).unwrap();
    let want = std::fs::read_to_string(dir.join(format!("{name}.ir"))).unwrap();
    let k = sparsec_core::parse_kernel(&kernel).unwrap();
    let got = sparsec_core::codegen::compile_all(&k)
        .unwrap()
        .iter()
        .map(sparsec_core::codegen::emit_program)
        .collect();
    (want, got)
}
