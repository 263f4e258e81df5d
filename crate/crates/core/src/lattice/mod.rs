//! Iteration graphs and merge lattices.

mod graph;
mod merge;

pub use graph::{build_iteration_graph, topo_sort, IterationGraph};
pub use merge::{
    build_lattice, lattice_for, lattice_text, operands, IExpr, LatticePoint, MergeLattice, Operand,
};
