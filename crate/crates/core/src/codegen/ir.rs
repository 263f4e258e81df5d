use crate::expr::Kernel;
use crate::lattice::Operand;

/// Index into [`Program::vars`].
pub type VarId = usize;

/// A sparse iterator: one storage level of one operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iter {
    pub operand: usize,
    pub level: usize,
}

/// Scalar expressions evaluated at the current loop positions.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Value of an operand at its current position.
    Load(usize),
    Const(f64),
    Reg(usize),
    Neg(Box<Value>),
    Add(Box<Value>, Box<Value>),
    Sub(Box<Value>, Box<Value>),
    Mul(Box<Value>, Box<Value>),
}

/// One guarded branch of a co-iteration loop. Runs when every iterator in
/// `iters` sits at the candidate coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub iters: Vec<Iter>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `for var in [0, extent)`.
    ForDense {
        var: VarId,
        extent: usize,
        body: Vec<Stmt>,
    },
    /// Walks every stored position of one loaded segment.
    ForPositions {
        var: VarId,
        iter: Iter,
        body: Vec<Stmt>,
    },
    /// Runs while all `iters` have positions left; the candidate coordinate
    /// is their minimum, the first matching case executes and every iterator
    /// at the candidate advances.
    WhileCoiter {
        var: VarId,
        iters: Vec<Iter>,
        cases: Vec<Case>,
    },
    /// Visits every coordinate in `[0, extent)`, dispatching on which
    /// iterators hold it. The last case may have no iterators.
    ForCoiter {
        var: VarId,
        extent: usize,
        iters: Vec<Iter>,
        cases: Vec<Case>,
    },
    /// Reads the segment bounds of a compressed level from the parent
    /// position.
    LoadRange {
        iter: Iter,
    },
    /// Position in a dense level: parent position times extent plus `var`.
    Locate {
        operand: usize,
        level: usize,
        var: VarId,
    },
    /// `r = 0`.
    ScalarInit {
        reg: usize,
    },
    /// `r += value`.
    Accumulate {
        reg: usize,
        value: Value,
    },
    ClearTouched,
    Touch,
    IfTouched {
        body: Vec<Stmt>,
    },
    /// `out[lhs vars] += value` into a dense output.
    StoreDense {
        value: Value,
    },
    /// Appends `out(lhs vars) = value` to a sparse output in lexicographic
    /// order.
    InsertLex {
        value: Value,
    },
    /// Overwrites the value at the current position of `operand`, which
    /// aliases the output.
    StoreInPlace {
        operand: usize,
        value: Value,
    },
    ExpandWs {
        extent: usize,
    },
    ScatterWs {
        var: VarId,
        value: Value,
    },
    /// Inserts the workspace contents under the given outer coordinates
    /// (output storage order) and clears it.
    CompressWs {
        prefix: Vec<VarId>,
    },
}

/// How results reach the output tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputStrategy {
    /// Dense or scalar output, updated with `+=`.
    DenseStore,
    /// Sparse output built by appending in order; its loops are outermost.
    DirectLex,
    /// Sparse output whose innermost storage variable is not iterated
    /// innermost: rows are gathered in a workspace and compressed.
    ExpandCompress { var: String },
    /// The output is also the only sparse operand and keeps its sparsity
    /// structure, so values are rewritten in place.
    InPlace { operand: usize },
}

/// A lowered kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub kernel: Kernel,
    /// Loop order.
    pub vars: Vec<String>,
    pub extents: Vec<usize>,
    pub operands: Vec<Operand>,
    pub strategy: OutputStrategy,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name)
    }

    /// Left-hand side variables in the output's logical dimension order.
    pub fn lhs_vars(&self) -> Vec<VarId> {
        self.kernel
            .lhs()
            .indices
            .iter()
            .map(|v| self.var_id(v).expect("lhs var in loop order"))
            .collect()
    }

    /// Every statement, depth first.
    pub fn walk(&self, f: &mut impl FnMut(&Stmt)) {
        fn go(stmts: &[Stmt], f: &mut impl FnMut(&Stmt)) {
            for s in stmts {
                f(s);
                match s {
                    Stmt::ForDense { body, .. }
                    | Stmt::ForPositions { body, .. }
                    | Stmt::IfTouched { body } => go(body, f),
                    Stmt::WhileCoiter { cases, .. } | Stmt::ForCoiter { cases, .. } => {
                        for c in cases {
                            go(&c.body, f);
                        }
                    }
                    _ => {}
                }
            }
        }
        go(&self.body, f)
    }
}
