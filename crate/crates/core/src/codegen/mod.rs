//! Lowering to a loop IR and its text form.

mod emit;
mod ir;
mod lower;

pub use emit::{emit_header, emit_program, emit_text};
pub use ir::{Case, Iter, OutputStrategy, Program, Stmt, Value, VarId};
pub use lower::{choose_output_strategy, compile, compile_all, lower};
