use std::collections::HashMap;

use anyhow::{bail, Context, Result};
use sparsec_core::expr::AssignOp;
use sparsec_core::io::{read_tensor, SourceSpec};
use sparsec_core::oracle::{generate, GeneratorKind, GeneratorSpec};
use sparsec_core::{CooTensor, Kernel};

/// Parses `uniform:RHO`, `rowband:ROWS` or `identity`.
pub fn generator(text: &str, seed: u64) -> Result<GeneratorKind> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    Ok(match kind {
        "uniform" => {
            let density: f64 = arg
                .parse()
                .with_context(|| format!("bad density `{arg}`"))?;
            if !(0.0..=1.0).contains(&density) {
                bail!("density {density} is outside [0, 1]");
            }
            GeneratorKind::UniformRandom { density, seed }
        }
        "rowband" => GeneratorKind::RowBand {
            rows: arg
                .parse()
                .with_context(|| format!("bad row count `{arg}`"))?,
            seed,
        },
        "identity" => GeneratorKind::Identity,
        other => bail!("unknown generator `{other}`"),
    })
}

/// Reads or generates every `NAME=SOURCE` binding. Generated tensors take
/// their shape from the kernel; the n-th binding uses `seed + n`.
pub fn load(k: &Kernel, specs: &[String], seed: u64) -> Result<HashMap<String, CooTensor>> {
    let mut out = HashMap::new();
    for (n, spec) in specs.iter().enumerate() {
        let (name, source) = spec
            .split_once('=')
            .with_context(|| format!("input `{spec}` is not NAME=PATH or NAME=gen:..."))?;
        let shape = k.tensor(name)?.shape().to_vec();
        let coo = match source.strip_prefix("gen:") {
            Some(g) => generate(&GeneratorSpec::new(
                generator(g, seed.wrapping_add(n as u64))?,
                shape,
            )),
            None => read_tensor(&SourceSpec::new(source))
                .with_context(|| format!("reading {source}"))?,
        };
        if out.insert(name.to_string(), coo).is_some() {
            bail!("input `{name}` bound twice");
        }
    }
    let mut needed = k.input_names();
    if k.op() == AssignOp::AddAssign {
        needed.push(k.lhs().tensor.clone());
    }
    if let Some(missing) = needed.iter().find(|n| !out.contains_key(*n)) {
        bail!("missing input tensor `{missing}`");
    }
    Ok(out)
}
