use super::ir::{Case, Iter, OutputStrategy, Program, Stmt, Value, VarId};
use crate::error::{Error, Result};
use crate::expr::{
    analyze_reductions, expand_accumulate, split_for_whole_expr_reduction, AssignOp, Kernel,
};
use crate::lattice::{
    build_iteration_graph, lattice_for, operands, topo_sort, IExpr, LatticePoint, Operand,
};

/// Output variables in the output's storage level order.
fn output_storage_vars(k: &Kernel) -> Vec<String> {
    let t = k.output_type();
    let lhs = &k.lhs().indices;
    match t.encoding() {
        Some(e) => (0..e.rank())
            .map(|l| lhs[e.dim_of_level(l)].clone())
            .collect(),
        None => lhs.clone(),
    }
}

fn has_compressed_level(op: &Operand) -> bool {
    op.ttype
        .encoding()
        .is_some_and(|e| e.levels().iter().any(|l| l.is_compressed()))
}

fn in_place_operand(k: &Kernel, ops: &[Operand], e: &IExpr) -> Option<usize> {
    let lhs = k.lhs();
    if k.op() != AssignOp::Assign {
        return None;
    }
    let mine: Vec<usize> = (0..ops.len())
        .filter(|&a| ops[a].tensor == lhs.tensor)
        .collect();
    let [x] = mine[..] else {
        return None;
    };
    let reduces = k.rhs().vars().iter().any(|v| !lhs.indices.contains(v));
    let others_sparse = ops
        .iter()
        .enumerate()
        .any(|(a, op)| a != x && has_compressed_level(op));
    if ops[x].indices != lhs.indices || reduces || others_sparse {
        return None;
    }
    // Zero wherever x is zero, and not identically zero.
    if !e.restrict(&|a| a != x).is_zero() || e.restrict(&|_| true).is_zero() {
        return None;
    }
    Some(x)
}

/// Picks how the output is written for the loop order `order`.
///
/// Dense and scalar outputs are stored directly. A sparse output whose
/// variables, in storage order, lead the loop order is appended to in
/// order; one whose variables except the innermost lead the loop order
/// goes through a workspace over that innermost variable. Any other sparse
/// output is rejected.
pub fn choose_output_strategy(k: &Kernel, order: &[String]) -> Result<OutputStrategy> {
    let out = k.output_type();
    let has_compressed = out
        .encoding()
        .is_some_and(|e| e.levels().iter().any(|l| l.is_compressed()));
    if !has_compressed {
        return Ok(OutputStrategy::DenseStore);
    }
    let (ops, e) = operands(k);
    if let Some(x) = in_place_operand(k, &ops, &e) {
        return Ok(OutputStrategy::InPlace { operand: x });
    }
    if !e.restrict(&|_| false).is_zero() {
        return Err(Error::Unsupported(format!(
            "`{}` is nonzero where every operand is zero, so sparse output `{}` would be dense; declare it without a format",
            k.rhs(),
            k.lhs().tensor
        )));
    }
    let vars = output_storage_vars(k);
    let m = vars.len();
    if order.len() >= m && order[..m] == vars[..] {
        return Ok(OutputStrategy::DirectLex);
    }
    if order[..m - 1] == vars[..m - 1] {
        return Ok(OutputStrategy::ExpandCompress {
            var: vars[m - 1].clone(),
        });
    }
    Err(Error::Unsupported(format!(
        "loop order {} does not start with the outer dimensions of sparse output `{}`; convert an operand or change the output ordering",
        order.join(","),
        k.lhs().tensor
    )))
}

struct Lowerer<'a> {
    ops: &'a [Operand],
    order: &'a [String],
    extents: &'a [usize],
    strategy: &'a OutputStrategy,
    /// Depth where an accumulator wraps the remaining reduction loops.
    acc_depth: Option<usize>,
    /// Depth whose loops are followed by a workspace compression.
    compress_depth: Option<usize>,
    ws_var: VarId,
    prefix: Vec<VarId>,
}

impl Lowerer<'_> {
    fn at(&self, depth: usize, e: &IExpr) -> Vec<Stmt> {
        let mut out = Vec::new();
        if self.acc_depth == Some(depth) {
            out.push(Stmt::ScalarInit { reg: 0 });
            let direct = *self.strategy == OutputStrategy::DirectLex;
            if direct {
                out.push(Stmt::ClearTouched);
            }
            out.extend(self.loops(depth, e));
            let value = Value::Reg(0);
            out.push(if direct {
                Stmt::IfTouched {
                    body: vec![Stmt::InsertLex { value }],
                }
            } else {
                Stmt::StoreDense { value }
            });
        } else {
            out.extend(self.loops(depth, e));
        }
        if self.compress_depth == Some(depth) {
            out.push(Stmt::CompressWs {
                prefix: self.prefix.clone(),
            });
        }
        out
    }

    fn loops(&self, depth: usize, e: &IExpr) -> Vec<Stmt> {
        if depth == self.order.len() {
            return self.leaf(e);
        }
        let var = &self.order[depth];
        let lattice = lattice_for(e, var, self.ops);
        if lattice.points.is_empty() {
            return Vec::new();
        }
        let iter = |a: usize| Iter {
            operand: a,
            level: self.ops[a].level_of(var).expect("iterated"),
        };
        let iters: Vec<Iter> = lattice.iterators().iter().map(|&a| iter(a)).collect();
        let mut out: Vec<Stmt> = iters
            .iter()
            .map(|&it| Stmt::LoadRange { iter: it })
            .collect();
        let case = |p: &LatticePoint| Case {
            iters: p.iterators.iter().map(|&a| iter(a)).collect(),
            body: self.case_body(depth, p),
        };
        let extent = self.extents[depth];
        if lattice.points.len() == 1 && iters.len() == 1 {
            out.push(Stmt::ForPositions {
                var: depth,
                iter: iters[0],
                body: self.case_body(depth, &lattice.points[0]),
            });
        } else if lattice.points.len() == 1 && iters.is_empty() {
            out.push(Stmt::ForDense {
                var: depth,
                extent,
                body: self.case_body(depth, &lattice.points[0]),
            });
        } else if lattice.has_dense_point() {
            out.push(Stmt::ForCoiter {
                var: depth,
                extent,
                iters,
                cases: lattice.points.iter().map(case).collect(),
            });
        } else {
            for i in 0..lattice.points.len() {
                out.push(Stmt::WhileCoiter {
                    var: depth,
                    iters: lattice.points[i]
                        .iterators
                        .iter()
                        .map(|&a| iter(a))
                        .collect(),
                    cases: lattice.sub_points(i).into_iter().map(case).collect(),
                });
            }
        }
        out
    }

    fn case_body(&self, depth: usize, p: &LatticePoint) -> Vec<Stmt> {
        let var = &self.order[depth];
        let mut out: Vec<Stmt> = p
            .locators
            .iter()
            .filter_map(|&a| {
                let level = self.ops[a].level_of(var)?;
                Some(Stmt::Locate {
                    operand: a,
                    level,
                    var: depth,
                })
            })
            .collect();
        out.extend(self.at(depth + 1, &p.expr));
        out
    }

    fn leaf(&self, e: &IExpr) -> Vec<Stmt> {
        let value = to_value(e);
        let acc = self.acc_depth.is_some();
        match self.strategy {
            OutputStrategy::DenseStore if acc => vec![Stmt::Accumulate { reg: 0, value }],
            OutputStrategy::DenseStore => vec![Stmt::StoreDense { value }],
            OutputStrategy::DirectLex if acc => {
                vec![Stmt::Accumulate { reg: 0, value }, Stmt::Touch]
            }
            OutputStrategy::DirectLex => vec![Stmt::InsertLex { value }],
            OutputStrategy::ExpandCompress { .. } => vec![Stmt::ScatterWs {
                var: self.ws_var,
                value,
            }],
            OutputStrategy::InPlace { operand } => vec![Stmt::StoreInPlace {
                operand: *operand,
                value,
            }],
        }
    }
}

fn to_value(e: &IExpr) -> Value {
    let b = |x: &IExpr| Box::new(to_value(x));
    match e {
        IExpr::Operand(a) => Value::Load(*a),
        IExpr::Const(c) => Value::Const(*c),
        IExpr::Neg(x) => Value::Neg(b(x)),
        IExpr::Add(l, r) => Value::Add(b(l), b(r)),
        IExpr::Sub(l, r) => Value::Sub(b(l), b(r)),
        IExpr::Mul(l, r) => Value::Mul(b(l), b(r)),
    }
}

/// Lowers `k` to loops in the given order using `strategy`.
pub fn lower(k: &Kernel, order: &[String], strategy: &OutputStrategy) -> Program {
    let (ops, e) = operands(k);
    let extents: Vec<usize> = order
        .iter()
        .map(|v| k.var_extent(v).expect("bound var"))
        .collect();
    let pos = |v: &String| order.iter().position(|o| o == v).expect("var in order");
    let out_vars = output_storage_vars(k);
    let m = out_vars.len();
    let acc_depth = match strategy {
        OutputStrategy::DenseStore => Some(
            k.lhs()
                .indices
                .iter()
                .map(|v| pos(v) + 1)
                .max()
                .unwrap_or(0),
        ),
        OutputStrategy::DirectLex => Some(m),
        _ => None,
    }
    .filter(|&d| d < order.len());
    let (compress_depth, ws_var, prefix) = match strategy {
        OutputStrategy::ExpandCompress { var } => (
            Some(m - 1),
            pos(var),
            out_vars[..m - 1].iter().map(pos).collect(),
        ),
        _ => (None, 0, Vec::new()),
    };
    let l = Lowerer {
        ops: &ops,
        order,
        extents: &extents,
        strategy,
        acc_depth,
        compress_depth,
        ws_var,
        prefix,
    };
    let mut body = Vec::new();
    if compress_depth.is_some() {
        body.push(Stmt::ExpandWs {
            extent: extents[ws_var],
        });
    }
    body.extend(l.at(0, &e));
    Program {
        kernel: k.clone(),
        vars: order.to_vec(),
        extents,
        operands: ops,
        strategy: strategy.clone(),
        body,
    }
}

/// Compiles a kernel whose reductions span its whole right-hand side. A
/// sparse `+=` output is rewritten to read its previous contents.
pub fn compile(k: &Kernel) -> Result<Program> {
    let k = if k.output_type().is_sparse() {
        expand_accumulate(k)
    } else {
        k.clone()
    };
    let ann = analyze_reductions(&k);
    if ann
        .reductions
        .iter()
        .any(|r| !ann.split_scope(&r.var).expect("reduction").is_empty())
    {
        return Err(Error::Unsupported(format!(
            "`{}` reduces inside a subexpression; split it first",
            k.rhs()
        )));
    }
    let order = topo_sort(&build_iteration_graph(&k))?;
    let strategy = choose_output_strategy(&k, &order)?;
    Ok(lower(&k, &order, &strategy))
}

/// Splits `k` into kernels whose reductions span their right-hand sides and
/// compiles each; the last one writes the original output.
pub fn compile_all(k: &Kernel) -> Result<Vec<Program>> {
    let k = if k.output_type().is_sparse() {
        expand_accumulate(k)
    } else {
        k.clone()
    };
    split_for_whole_expr_reduction(&analyze_reductions(&k))
        .iter()
        .map(compile)
        .collect()
}
