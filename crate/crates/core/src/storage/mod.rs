//! Storage schemes: coordinate lists, dense arrays, packed sparse storage,
//! the lexicographic insertion builder and the expand/compress workspace.

mod binary;
mod builder;
mod coo;
mod dense;
mod sparse;
mod workspace;

pub use binary::{read_binary, write_binary};
pub use builder::SparseBuilder;
pub use coo::CooTensor;
pub use dense::{row_major_strides, DenseTensor};
pub use sparse::{SparseStorage, StorageIter};
pub use workspace::Workspace;
