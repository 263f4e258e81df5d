//! The ten acceptance checks. Each prints one PASS/FAIL line with its
//! runtime against the allowed budget; the binary exits nonzero if any
//! check fails. Runs without the test harness so the lines always show.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsec_core::codegen::{compile, OutputStrategy};
use sparsec_core::exec::{convert, run_kernel, Tensor};
use sparsec_core::fixtures::*;
use sparsec_core::io::{format_extended_frostt, parse_extended_frostt, read_tensor, SourceSpec};
use sparsec_core::lattice::build_lattice;
use sparsec_core::oracle::{density, generate, GeneratorKind, GeneratorSpec};
use sparsec_core::search::search;
use sparsec_core::{parse_kernel, CooTensor, Encoding, LevelType, SparseStorage, TensorType};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn uniform(shape: Vec<usize>, density: f64, seed: u64) -> CooTensor {
    generate(&GeneratorSpec::new(
        GeneratorKind::UniformRandom { density, seed },
        shape,
    ))
}

fn storage_layouts() -> Check {
    let vec = SparseStorage::pack(&vector_x(), &Encoding::all_compressed(1).unwrap()).unwrap();
    ensure!(vec.level_pointers(0).unwrap() == [0, 4], "vector pointers");
    ensure!(
        vec.level_indices(0).unwrap() == [3, 6, 7, 10],
        "vector indices"
    );
    ensure!(vec.values_view() == [X3, X6, X7, X10], "vector values");

    let csr = SparseStorage::pack(&matrix_a(), &Encoding::csr()).unwrap();
    ensure!(
        csr.level_pointers(1).unwrap() == [0, 2, 2, 3],
        "CSR pointers"
    );
    ensure!(csr.level_indices(1).unwrap() == [0, 3, 0], "CSR indices");
    ensure!(csr.values_view() == [A00, A03, A20], "CSR values");

    let cd = SparseStorage::pack(&matrix_a(), &Encoding::cdr()).unwrap();
    ensure!(
        cd.level_pointers(0).unwrap() == [0, 2],
        "compressed-dense pointers"
    );
    ensure!(
        cd.level_indices(0).unwrap() == [0, 2],
        "compressed-dense indices"
    );
    ensure!(
        cd.values_view() == [A00, 0.0, 0.0, A03, A20, 0.0, 0.0, 0.0],
        "compressed-dense values"
    );

    let dcsc = SparseStorage::pack(&matrix_a(), &Encoding::dcsc()).unwrap();
    ensure!(
        dcsc.level_pointers(0).unwrap() == [0, 2],
        "DCSC outer pointers"
    );
    ensure!(
        dcsc.level_indices(0).unwrap() == [0, 3],
        "DCSC outer indices"
    );
    ensure!(
        dcsc.level_pointers(1).unwrap() == [0, 2, 3],
        "DCSC inner pointers"
    );
    ensure!(
        dcsc.level_indices(1).unwrap() == [0, 2, 0],
        "DCSC inner indices"
    );
    ensure!(dcsc.values_view() == [A00, A20, A03], "DCSC values");

    let t = SparseStorage::pack(&tensor_t(), &Encoding::all_compressed(3).unwrap()).unwrap();
    ensure!(
        t.level_pointers(0).unwrap() == [0, 2] && t.level_indices(0).unwrap() == [0, 2],
        "T level 0"
    );
    ensure!(
        t.level_pointers(1).unwrap() == [0, 1, 3] && t.level_indices(1).unwrap() == [0, 0, 1],
        "T level 1"
    );
    ensure!(
        t.level_pointers(2).unwrap() == [0, 1, 3, 5]
            && t.level_indices(2).unwrap() == [0, 0, 2, 2, 3],
        "T level 2"
    );
    ensure!(
        t.values_view() == [T000, T200, T202, T212, T213],
        "T values"
    );
    Ok("5 layouts".into())
}

fn encoding_invariance() -> Check {
    let k = parse_kernel("tensor A(64,64) format(dense,compressed)\ntensor B(64,64)\ntensor C(64,64)\nC(i,j) = A(i,k) * B(k,j)")
        .unwrap();
    let inputs = HashMap::from([
        ("A".to_string(), uniform(vec![64, 64], 0.05, 2)),
        ("B".to_string(), uniform(vec![64, 64], 1.0, 3)),
    ]);
    let report = search(&k, "A", &inputs, true).map_err(|e| e.to_string())?;
    ensure!(
        report.rows.len() == 200,
        "{} configurations",
        report.rows.len()
    );
    let sums = report.checksums();
    ensure!(
        sums.len() == 200,
        "only {} of 200 configurations ran",
        sums.len()
    );
    report.verify().map_err(|e| e.to_string())?;
    Ok(format!("200 configurations, checksum {}", &sums[0][..12]))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for n in 0..500 {
        let integer = n % 2 == 0;
        let (case, out) = common::random_case(&mut rng, integer);
        let d = common::max_rel_diff(&out.to_dense(), &common::oracle(&case));
        ensure!(
            !integer || d == 0.0,
            "integer case differs by {d}:\n{}",
            case.text
        );
        ensure!(d <= 1e-10, "real case differs by {d}:\n{}", case.text);
        worst = worst.max(d);
    }
    Ok(format!(
        "500 kernels, worst relative difference {worst:.1e}"
    ))
}

fn spmspm(n: usize, seed: u64) -> Tensor {
    let text = format!(
        "tensor A({n},{n}) format(dense,compressed)\ntensor B({n},{n}) format(dense,compressed)\n\
         tensor C({n},{n}) format(dense,compressed)\nC(i,j) = A(i,k) * B(k,j)"
    );
    let k = parse_kernel(&text).unwrap();
    let inputs = common::bind(
        &k,
        &[
            ("A", uniform(vec![n, n], 0.01, seed)),
            ("B", uniform(vec![n, n], 0.01, seed + 1)),
        ],
    );
    run_kernel(&k, &inputs).unwrap()
}

fn spmspm_density() -> Check {
    let r1 = density(&spmspm(1024, 10).to_coo());
    ensure!((0.09..=0.11).contains(&r1), "n=1024 density {r1:.4}");
    let r2 = density(&spmspm(2048, 20).to_coo());
    ensure!((0.18..=0.20).contains(&r2), "n=2048 density {r2:.4}");
    Ok(format!("density {r1:.4} at 1024, {r2:.4} at 2048"))
}

fn workspace_path() -> Check {
    let ops = "tensor A(64,48) format(dense,compressed)\ntensor B(48,56) format(dense,compressed)";
    let sparse = parse_kernel(&format!(
        "{ops}\ntensor C(64,56) format(dense,compressed)\nC(i,j) = A(i,k) * B(k,j)"
    ))
    .unwrap();
    let dense = parse_kernel(&format!("{ops}\ntensor C(64,56)\nC(i,j) = A(i,k) * B(k,j)")).unwrap();
    let strategy = compile(&sparse).map_err(|e| e.to_string())?.strategy;
    ensure!(
        matches!(&strategy, OutputStrategy::ExpandCompress { var } if var == "j"),
        "strategy {strategy:?}"
    );
    let raw = [
        ("A", uniform(vec![64, 48], 0.05, 5)),
        ("B", uniform(vec![48, 56], 0.05, 6)),
    ];
    let got = run_kernel(&sparse, &common::bind(&sparse, &raw)).unwrap();
    let case = common::Case {
        text: String::new(),
        kernel: sparse.clone(),
        inputs: raw
            .iter()
            .map(|(n, c)| (n.to_string(), c.clone()))
            .collect(),
    };
    let want = common::oracle(&case);
    ensure!(got.to_dense() == want, "differs from the oracle");
    let via_dense = run_kernel(&dense, &common::bind(&dense, &raw)).unwrap();
    let converted = convert(&via_dense, sparse.output_type()).unwrap();
    ensure!(
        converted.to_coo().nonzero_set() == got.to_coo().nonzero_set(),
        "nonzero sets differ"
    );
    ensure!(
        converted.to_dense() == got.to_dense(),
        "values differ after conversion"
    );
    Ok(format!("ExpandCompress(j), {} nonzeros", got.nnz()))
}

fn coiteration() -> Check {
    let vec = |idx: &[usize]| {
        CooTensor::from_entries(vec![12], idx.iter().map(|&i| ([i], (i + 1) as f64))).unwrap()
    };
    let configs = [
        ("disjoint", vec(&[0, 2, 4]), vec(&[1, 3, 11])),
        ("subset", vec(&[2, 5, 9]), vec(&[0, 2, 5, 7, 9])),
        ("equal", vec(&[1, 4, 8, 10]), vec(&[1, 4, 8, 10])),
        ("overlapping", vec(&[0, 3, 6, 9]), vec(&[3, 4, 9, 11])),
    ];
    let decl = "tensor a(12) format(compressed)\ntensor b(12) format(compressed)\n";
    let dot = parse_kernel(&format!("{decl}tensor s()\ns() = a(i) * b(i)")).unwrap();
    let add = parse_kernel(&format!(
        "{decl}tensor x(12) format(compressed)\nx(i) = a(i) + b(i)"
    ))
    .unwrap();
    let points = (
        build_lattice(&dot, "i").unwrap().points.len(),
        build_lattice(&add, "i").unwrap().points.len(),
    );
    ensure!(points == (1, 3), "lattice points {points:?}");
    for (name, a, b) in configs {
        for k in [&dot, &add] {
            let raw = [("a", a.clone()), ("b", b.clone())];
            let got = run_kernel(k, &common::bind(k, &raw)).unwrap();
            let case = common::Case {
                text: String::new(),
                kernel: k.clone(),
                inputs: raw
                    .iter()
                    .map(|(n, c)| (n.to_string(), c.clone()))
                    .collect(),
            };
            ensure!(
                got.to_dense() == common::oracle(&case),
                "{name}: {} differs",
                k.rhs()
            );
        }
    }
    Ok("4 support configurations, lattice points 1 and 3".into())
}

fn io_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in 0..100 {
        let coo = common::random_tensor(&mut rng, 1 + n % 4);
        let back =
            parse_extended_frostt(&format_extended_frostt(&coo)).map_err(|e| e.to_string())?;
        ensure!(back == coo, "tensor {n} changed in a round trip");
    }
    for (name, shape, entries) in common::mtx_fixtures() {
        let coo =
            read_tensor(&SourceSpec::new(common::data_path(name))).map_err(|e| e.to_string())?;
        ensure!(
            coo.shape() == shape && coo.nonzero_entries() == entries,
            "{name} parsed wrong"
        );
    }
    Ok("100 FROSTT tensors, 3 Matrix Market fixtures".into())
}

fn format_cycles() -> Check {
    let shape = vec![32, 32];
    let types: Vec<TensorType> = [
        Some(Encoding::csr()),
        Some(Encoding::csc()),
        Some(Encoding::dcsr()),
        Some(Encoding::dcsc()),
        None,
    ]
    .into_iter()
    .map(|e| TensorType::new(shape.clone(), e).unwrap())
    .collect();
    for seed in 0..20 {
        let coo = uniform(
            shape.clone(),
            [0.0, 0.02, 0.1, 0.5][seed as usize % 4],
            seed,
        );
        let mut t = Tensor::from_coo(&coo, &types[0]).unwrap();
        for to in types[1..].iter().chain(&types[..1]) {
            t = convert(&t, to).map_err(|e| e.to_string())?;
            ensure!(
                t.to_coo().nonzero_set() == coo.nonzero_set(),
                "seed {seed}: set changed at {to:?}"
            );
        }
        ensure!(
            t.to_coo().nonzero_entries() == coo.nonzero_entries(),
            "seed {seed}: values changed"
        );
    }
    Ok("20 matrices through CSR, CSC, DCSR, DCSC, dense".into())
}

fn mttkrp() -> Check {
    use LevelType::{Compressed, Dense};
    let dss = Encoding::with_levels(&[Dense, Compressed, Compressed]).unwrap();
    let alt = Encoding::new(
        vec![Dense, Compressed, Compressed],
        Some(vec![0, 2, 1]),
        None,
        None,
    )
    .unwrap();
    let raw = [
        ("B", uniform(vec![30, 20, 25], 0.05, 31)),
        ("C", uniform(vec![20, 8], 1.0, 32)),
        ("D", uniform(vec![25, 8], 1.0, 33)),
    ];
    let mut results = Vec::new();
    for enc in [dss, alt] {
        let text = format!(
            "tensor B(30,20,25) {enc}\ntensor C(20,8)\ntensor D(25,8)\ntensor A(30,8)\nA(i,j) = B(i,k,l) * D(l,j) * C(k,j)"
        );
        let k = parse_kernel(&text).unwrap();
        let got = run_kernel(&k, &common::bind(&k, &raw))
            .map_err(|e| e.to_string())?
            .to_dense();
        let case = common::Case {
            text: text.clone(),
            kernel: k,
            inputs: raw
                .iter()
                .map(|(n, c)| (n.to_string(), c.clone()))
                .collect(),
        };
        let d = common::max_rel_diff(&got, &common::oracle(&case));
        ensure!(d <= 1e-10, "{enc}: relative difference {d}");
        results.push(got);
    }
    let d = common::max_rel_diff(&results[0], &results[1]);
    ensure!(d <= 1e-10, "encodings disagree by {d}");
    Ok(format!(
        "both encodings match the oracle, agree within {d:.1e}"
    ))
}

fn golden_ir() -> Check {
    for name in ["scale", "dot", "spmspm"] {
        let (want, got) = common::golden(name);
        ensure!(want == got, "{name} IR differs:\n{got}");
    }
    Ok("scale, dot, spmspm".into())
}

fn main() {
    let checks: [Criterion; 10] = [
        ("storage layouts", Duration::from_secs(1), storage_layouts),
        (
            "encoding invariance",
            Duration::from_secs(30),
            encoding_invariance,
        ),
        (
            "oracle equivalence",
            Duration::from_secs(60),
            oracle_equivalence,
        ),
        ("SpMSpM density", Duration::from_secs(60), spmspm_density),
        ("workspace path", Duration::from_secs(10), workspace_path),
        ("co-iteration", Duration::from_secs(1), coiteration),
        ("I/O round trips", Duration::from_secs(10), io_round_trips),
        (
            "format conversion cycles",
            Duration::from_secs(10),
            format_cycles,
        ),
        ("MTTKRP", Duration::from_secs(10), mttkrp),
        ("golden IR", Duration::from_secs(1), golden_ir),
    ];
    let mut failed = Vec::new();
    for (n, (name, budget, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > *budget => {
                Err(format!("{detail}; took {took:.2?}, budget {budget:?}"))
            }
            other => other,
        };
        match &result {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{took:.2?}]", n + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why} [{took:.2?}]", n + 1);
                failed.push(n + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
