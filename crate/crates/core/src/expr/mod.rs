//! Tensor index notation: AST, parser and reduction analysis.

mod analysis;
mod ast;
mod parser;

pub use analysis::{
    access_paths, analyze_reductions, expand_accumulate, split_for_whole_expr_reduction,
    AnnotatedKernel, Reduction,
};
pub use ast::{Access, AssignOp, Expr, Kernel, TensorDecl};
pub use parser::{parse_encoding, parse_kernel};
