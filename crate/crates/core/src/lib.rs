//! A sparse tensor algebra compiler and runtime.
//!
//! Kernels are written in tensor index notation over tensors that carry an
//! optional sparse [`Encoding`]. The compiler builds an iteration graph over
//! the index variables, sorts it against each tensor's dimension ordering,
//! constructs merge lattices per index variable, and lowers the kernel to a
//! loop IR that only visits stored elements. The IR is executed by an
//! interpreter and can be checked against a dense reference evaluator.

pub mod codegen;
pub mod encoding;
pub mod error;
pub mod exec;
pub mod expr;
pub mod fixtures;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod search;
pub mod storage;

pub use encoding::{Encoding, LevelType, TensorType};
pub use error::{Error, Result};
pub use expr::{parse_kernel, Kernel};
pub use storage::{CooTensor, DenseTensor, SparseBuilder, SparseStorage, Workspace};
