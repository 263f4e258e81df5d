//! Desk-scale kernel suites. Timings are informational; every suite first
//! checks its kernels against the dense reference at a small size.

use std::collections::HashMap;
use std::time::Instant;

use anyhow::{ensure, Result};
use clap::ValueEnum;
use sparsec_core::exec::{bind_inputs, run_kernel};
use sparsec_core::oracle::{dense_eval, density, generate, GeneratorKind, GeneratorSpec};
use sparsec_core::{parse_kernel, CooTensor, DenseTensor};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Spmspm,
    Spmv,
    Sddmm,
    Mttkrp,
}

struct Variant {
    label: &'static str,
    kernel: String,
    inputs: HashMap<String, CooTensor>,
}

fn uniform(shape: Vec<usize>, density: f64, seed: u64) -> CooTensor {
    generate(&GeneratorSpec::new(
        GeneratorKind::UniformRandom { density, seed },
        shape,
    ))
}

fn variants(suite: Suite, n: usize, seed: u64) -> Vec<Variant> {
    match suite {
        Suite::Spmspm => {
            let a = uniform(vec![n, n], 0.01, seed);
            let b = uniform(vec![n, n], 0.01, seed + 1);
            let csr = "format(dense,compressed)";
            vec![Variant {
                label: "csr",
                kernel: format!(
                    "tensor A({n},{n}) {csr}\ntensor B({n},{n}) {csr}\ntensor C({n},{n}) {csr}\nC(i,j) = A(i,k) * B(k,j)"
                ),
                inputs: HashMap::from([("A".into(), a), ("B".into(), b)]),
            }]
        }
        Suite::Spmv => {
            let rows = (n / 128).max(1);
            let a = generate(&GeneratorSpec::new(
                GeneratorKind::RowBand { rows, seed },
                vec![n, n],
            ));
            let b = uniform(vec![n], 1.0, seed + 1);
            [
                ("csr", "format(dense,compressed)"),
                ("dcsr", "format(compressed,compressed)"),
                ("cdr", "format(compressed,dense)"),
            ]
            .into_iter()
            .map(|(label, enc)| Variant {
                label,
                kernel: format!(
                    "tensor A({n},{n}) {enc}\ntensor b({n})\ntensor x({n})\nx(i) = A(i,j) * b(j)"
                ),
                inputs: HashMap::from([("A".into(), a.clone()), ("b".into(), b.clone())]),
            })
            .collect()
        }
        Suite::Sddmm => {
            let r = 16;
            vec![Variant {
                label: "csr",
                kernel: format!(
                    "tensor S({n},{n}) format(dense,compressed)\ntensor A({n},{r})\ntensor B({r},{n})\n\
                     tensor X({n},{n}) format(dense,compressed)\nX(i,j) = S(i,j) * A(i,k) * B(k,j)"
                ),
                inputs: HashMap::from([
                    ("S".into(), uniform(vec![n, n], 0.01, seed)),
                    ("A".into(), uniform(vec![n, r], 1.0, seed + 1)),
                    ("B".into(), uniform(vec![r, n], 1.0, seed + 2)),
                ]),
            }]
        }
        Suite::Mttkrp => {
            let (k, l, r) = ((n * 2 / 3).max(1), (n * 5 / 6).max(1), 8);
            let b = uniform(vec![n, k, l], 0.01, seed);
            let c = uniform(vec![k, r], 1.0, seed + 1);
            let d = uniform(vec![l, r], 1.0, seed + 2);
            [
                ("dss", "format(dense,compressed,compressed)"),
                ("dss-alt", "format(dense,compressed,compressed) order(0,2,1)"),
            ]
            .into_iter()
            .map(|(label, enc)| Variant {
                label,
                kernel: format!(
                    "tensor B({n},{k},{l}) {enc}\ntensor C({k},{r})\ntensor D({l},{r})\ntensor A({n},{r})\n\
                     A(i,j) = B(i,k,l) * D(l,j) * C(k,j)"
                ),
                inputs: HashMap::from([("B".into(), b.clone()), ("C".into(), c.clone()), ("D".into(), d.clone())]),
            })
            .collect()
        }
    }
}

fn default_scale(suite: Suite) -> usize {
    match suite {
        Suite::Spmspm => 1024,
        Suite::Spmv => 8192,
        Suite::Sddmm => 512,
        Suite::Mttkrp => 64,
    }
}

/// Runs every variant at a size small enough for the dense reference.
fn check(suite: Suite, seed: u64) -> Result<()> {
    for v in variants(suite, 24, seed) {
        let k = parse_kernel(&v.kernel)?;
        let got = run_kernel(&k, &bind_inputs(&k, &v.inputs)?)?.to_dense();
        let dense: HashMap<String, DenseTensor> = v
            .inputs
            .iter()
            .map(|(n, c)| (n.clone(), DenseTensor::from_coo(c)))
            .collect();
        let want = dense_eval(&k, &dense)?;
        let worst = got
            .data()
            .iter()
            .zip(want.data())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        ensure!(
            worst <= 1e-10,
            "{} differs from the reference by {worst:e}",
            v.label
        );
    }
    Ok(())
}

pub fn run(suite: Suite, scale: Option<usize>, seed: u64) -> Result<()> {
    check(suite, seed)?;
    println!("reference check at n=24: ok");
    let n = scale.unwrap_or_else(|| default_scale(suite));
    println!(
        "{:<10} {:>8} {:>10} {:>10} {:>10} {:>12}",
        "variant", "n", "nnz_in", "nnz_out", "density", "time_ms"
    );
    for v in variants(suite, n, seed) {
        let k = parse_kernel(&v.kernel)?;
        let bound = bind_inputs(&k, &v.inputs)?;
        let nnz_in: usize = v.inputs.values().map(|c| c.nnz()).sum();
        let start = Instant::now();
        let out = run_kernel(&k, &bound)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let rho = density(&out.to_coo().without_zeros());
        println!(
            "{:<10} {:>8} {:>10} {:>10} {:>10.4} {:>12.3}",
            v.label,
            n,
            nnz_in,
            out.nnz(),
            rho,
            ms
        );
    }
    Ok(())
}
