//! Execution: runtime tensors, conversion and the kernel runner.

mod interp;
mod tensor;

use std::collections::HashMap;

pub use interp::interpret;
pub use tensor::{convert, Tensor};

use crate::codegen::compile_all;
use crate::encoding::TensorType;
use crate::error::{Error, Result};
use crate::expr::{AssignOp, Kernel};
use crate::storage::CooTensor;

fn layout_name(t: Option<&crate::Encoding>) -> String {
    match t {
        Some(e) => e.to_string(),
        None => "dense".to_string(),
    }
}

/// Checks that a bound tensor has the declared shape and layout.
pub fn check_binding(name: &str, declared: &TensorType, t: &Tensor) -> Result<()> {
    if t.shape() != declared.shape() {
        return Err(Error::ShapeMismatch(format!(
            "`{name}` is declared {:?} but bound to shape {:?}",
            declared.shape(),
            t.shape()
        )));
    }
    if t.encoding() != declared.encoding() {
        return Err(Error::FormatMismatch {
            name: name.to_string(),
            expected: layout_name(declared.encoding()),
            found: layout_name(t.encoding()),
        });
    }
    Ok(())
}

/// Packs coordinate lists into the layouts a kernel declares.
pub fn bind_inputs(
    k: &Kernel,
    inputs: &HashMap<String, CooTensor>,
) -> Result<HashMap<String, Tensor>> {
    inputs
        .iter()
        .map(|(name, coo)| Ok((name.clone(), Tensor::from_coo(coo, k.tensor(name)?)?)))
        .collect()
}

/// Compiles and runs a kernel. Kernels reducing inside subexpressions run
/// as a sequence, with temporaries passed from one step to the next. The
/// result has the layout declared for the output.
pub fn run_kernel(k: &Kernel, inputs: &HashMap<String, Tensor>) -> Result<Tensor> {
    let mut needed = k.input_names();
    if k.op() == AssignOp::AddAssign && !needed.contains(&k.lhs().tensor) {
        needed.push(k.lhs().tensor.clone());
    }
    for name in &needed {
        let t = inputs
            .get(name)
            .ok_or_else(|| Error::MissingInput(name.clone()))?;
        check_binding(name, k.tensor(name)?, t)?;
    }
    let programs = compile_all(k)?;
    let mut temps: HashMap<String, Tensor> = HashMap::new();
    let mut result = None;
    for p in &programs {
        let mut env: HashMap<String, &Tensor> =
            inputs.iter().map(|(n, t)| (n.clone(), t)).collect();
        for (n, t) in &temps {
            env.insert(n.clone(), t);
        }
        let out = interpret(p, &env)?;
        result = Some(out.clone());
        temps.insert(p.kernel.lhs().tensor.clone(), out);
    }
    Ok(result.expect("at least one program"))
}
