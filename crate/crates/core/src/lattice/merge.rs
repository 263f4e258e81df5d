use std::fmt::Write as _;

use super::graph::{build_iteration_graph, topo_sort};
use crate::encoding::TensorType;
use crate::error::{Error, Result};
use crate::expr::{Expr, Kernel};

/// One right-hand side access, numbered left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Operand {
    pub tensor: String,
    pub indices: Vec<String>,
    pub ttype: TensorType,
}

impl Operand {
    /// Storage level indexed by `var`, for tensors with an encoding.
    pub fn level_of(&self, var: &str) -> Option<usize> {
        let enc = self.ttype.encoding()?;
        self.indices
            .iter()
            .position(|v| v == var)
            .map(|d| enc.level_of_dim(d))
    }

    /// Whether iterating `var` walks a compressed level of this operand.
    pub fn is_compressed_at(&self, var: &str) -> bool {
        match (self.ttype.encoding(), self.level_of(var)) {
            (Some(e), Some(l)) => e.level_type(l).is_compressed(),
            _ => false,
        }
    }

    pub fn uses(&self, var: &str) -> bool {
        self.indices.iter().any(|v| v == var)
    }

    /// Iterator label: tensor name, operand number and level.
    pub fn iter_name(&self, id: usize, level: usize) -> String {
        format!("{}{id}_{level}", self.tensor)
    }
}

/// An expression over numbered operands.
#[derive(Debug, Clone, PartialEq)]
pub enum IExpr {
    Operand(usize),
    Const(f64),
    Neg(Box<IExpr>),
    Add(Box<IExpr>, Box<IExpr>),
    Sub(Box<IExpr>, Box<IExpr>),
    Mul(Box<IExpr>, Box<IExpr>),
}

impl IExpr {
    /// Numbers the accesses of `e`, appending them to `ops`.
    pub fn from_expr(k: &Kernel, e: &Expr, ops: &mut Vec<Operand>) -> IExpr {
        let bin = |l: &Expr, r: &Expr, ops: &mut Vec<Operand>| {
            let l = IExpr::from_expr(k, l, ops);
            (Box::new(l), Box::new(IExpr::from_expr(k, r, ops)))
        };
        match e {
            Expr::Access(a) => {
                ops.push(Operand {
                    tensor: a.tensor.clone(),
                    indices: a.indices.clone(),
                    ttype: k.tensor(&a.tensor).expect("validated").clone(),
                });
                IExpr::Operand(ops.len() - 1)
            }
            Expr::Const(c) => IExpr::Const(*c),
            Expr::Neg(x) => IExpr::Neg(Box::new(IExpr::from_expr(k, x, ops))),
            Expr::Add(l, r) => {
                let (l, r) = bin(l, r, ops);
                IExpr::Add(l, r)
            }
            Expr::Sub(l, r) => {
                let (l, r) = bin(l, r, ops);
                IExpr::Sub(l, r)
            }
            Expr::Mul(l, r) => {
                let (l, r) = bin(l, r, ops);
                IExpr::Mul(l, r)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, IExpr::Const(c) if *c == 0.0)
    }

    /// Operand ids in left-to-right order.
    pub fn operands(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let IExpr::Operand(a) = e {
                out.push(*a);
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&IExpr)) {
        f(self);
        match self {
            IExpr::Operand(_) | IExpr::Const(_) => {}
            IExpr::Neg(x) => x.visit(f),
            IExpr::Add(l, r) | IExpr::Sub(l, r) | IExpr::Mul(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    /// Replaces operands for which `keep` is false by zero and folds the
    /// zeros away: `x*0 = 0`, `x+0 = x`, `x-0 = x`, `0-y = -y`, `-0 = 0`.
    pub fn restrict(&self, keep: &impl Fn(usize) -> bool) -> IExpr {
        let zero = IExpr::Const(0.0);
        match self {
            IExpr::Operand(a) if !keep(*a) => zero,
            IExpr::Operand(_) | IExpr::Const(_) => self.clone(),
            IExpr::Neg(x) => {
                let x = x.restrict(keep);
                if x.is_zero() {
                    zero
                } else {
                    IExpr::Neg(Box::new(x))
                }
            }
            IExpr::Add(l, r) | IExpr::Sub(l, r) | IExpr::Mul(l, r) => {
                let (l, r) = (l.restrict(keep), r.restrict(keep));
                match self {
                    IExpr::Mul(..) if l.is_zero() || r.is_zero() => zero,
                    IExpr::Mul(..) => IExpr::Mul(Box::new(l), Box::new(r)),
                    _ if r.is_zero() => l,
                    IExpr::Add(..) if l.is_zero() => r,
                    IExpr::Add(..) => IExpr::Add(Box::new(l), Box::new(r)),
                    _ if l.is_zero() => IExpr::Neg(Box::new(r)),
                    _ => IExpr::Sub(Box::new(l), Box::new(r)),
                }
            }
        }
    }

    /// Converts back to a plain expression.
    pub fn to_expr(&self, ops: &[Operand]) -> Expr {
        match self {
            IExpr::Operand(a) => Expr::Access(crate::expr::Access {
                tensor: ops[*a].tensor.clone(),
                indices: ops[*a].indices.clone(),
            }),
            IExpr::Const(c) => Expr::Const(*c),
            IExpr::Neg(x) => Expr::neg(x.to_expr(ops)),
            IExpr::Add(l, r) => Expr::add(l.to_expr(ops), r.to_expr(ops)),
            IExpr::Sub(l, r) => Expr::sub(l.to_expr(ops), r.to_expr(ops)),
            IExpr::Mul(l, r) => Expr::mul(l.to_expr(ops), r.to_expr(ops)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    /// Operands co-iterated over a compressed level, ascending ids.
    pub iterators: Vec<usize>,
    /// Operands that use the variable through a dense (random access) level.
    pub locators: Vec<usize>,
    /// Value computed when exactly `iterators` hold the current coordinate.
    pub expr: IExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeLattice {
    pub var: String,
    pub points: Vec<LatticePoint>,
}

impl MergeLattice {
    /// Iterators of the first point, which holds all of them.
    pub fn iterators(&self) -> &[usize] {
        self.points.first().map_or(&[], |p| &p.iterators)
    }

    /// Whether some point needs no iterator, so every coordinate of the
    /// variable's range has to be visited.
    pub fn has_dense_point(&self) -> bool {
        self.points.iter().any(|p| p.iterators.is_empty())
    }

    /// Points whose iterators are a subset of point `i`'s, starting at `i`.
    pub fn sub_points(&self, i: usize) -> Vec<&LatticePoint> {
        let top = &self.points[i];
        self.points[i..]
            .iter()
            .filter(|p| p.iterators.iter().all(|a| top.iterators.contains(a)))
            .collect()
    }

    pub fn text(&self, ops: &[Operand]) -> String {
        let mut s = format!("lattice {}\n", self.var);
        for p in &self.points {
            let names: Vec<String> = p
                .iterators
                .iter()
                .map(|&a| ops[a].iter_name(a, ops[a].level_of(&self.var).expect("iterated")))
                .collect();
            let _ = write!(s, "  {{{}}}", names.join(", "));
            if !p.locators.is_empty() {
                let locs: Vec<String> = p
                    .locators
                    .iter()
                    .map(|&a| format!("{}{a}", ops[a].tensor))
                    .collect();
                let _ = write!(s, " locate {}", locs.join(", "));
            }
            let _ = writeln!(s, ": {}", p.expr.to_expr(ops));
        }
        s
    }
}

/// Iterator sets before simplification: one singleton per compressed
/// access, products take all pairwise unions, sums and differences take the
/// pairwise unions followed by the points of either side.
fn raw_points(e: &IExpr, var: &str, ops: &[Operand]) -> Vec<Vec<usize>> {
    let union = |l: &[Vec<usize>], r: &[Vec<usize>]| {
        let mut out = Vec::with_capacity(l.len() * r.len());
        for a in l {
            for b in r {
                let mut s = a.clone();
                s.extend(b.iter().filter(|x| !a.contains(x)));
                s.sort_unstable();
                out.push(s);
            }
        }
        out
    };
    match e {
        IExpr::Operand(a) if ops[*a].is_compressed_at(var) => vec![vec![*a]],
        IExpr::Operand(_) | IExpr::Const(_) => vec![vec![]],
        IExpr::Neg(x) => raw_points(x, var, ops),
        IExpr::Mul(l, r) => union(&raw_points(l, var, ops), &raw_points(r, var, ops)),
        IExpr::Add(l, r) | IExpr::Sub(l, r) => {
            let (l, r) = (raw_points(l, var, ops), raw_points(r, var, ops));
            let mut out = union(&l, &r);
            out.extend(l);
            out.extend(r);
            out
        }
    }
}

/// Lattice of `e` for `var`. Each point's expression is `e` with the
/// iterators missing from the point set to zero; points whose expression
/// folds to zero are dropped, duplicates keep their first occurrence and
/// larger iterator sets come first.
pub fn lattice_for(e: &IExpr, var: &str, ops: &[Operand]) -> MergeLattice {
    let mut points: Vec<LatticePoint> = Vec::new();
    for set in raw_points(e, var, ops) {
        if points.iter().any(|p| p.iterators == set) {
            continue;
        }
        let expr = e.restrict(&|a| !ops[a].is_compressed_at(var) || set.contains(&a));
        if expr.is_zero() {
            continue;
        }
        let mut locators: Vec<usize> = expr
            .operands()
            .into_iter()
            .filter(|&a| ops[a].uses(var) && !ops[a].is_compressed_at(var))
            .collect();
        locators.sort_unstable();
        locators.dedup();
        points.push(LatticePoint {
            iterators: set,
            locators,
            expr,
        });
    }
    points.sort_by_key(|p| std::cmp::Reverse(p.iterators.len()));
    MergeLattice {
        var: var.to_string(),
        points,
    }
}

/// Numbers the right-hand side accesses of `k`.
pub fn operands(k: &Kernel) -> (Vec<Operand>, IExpr) {
    let mut ops = Vec::new();
    let e = IExpr::from_expr(k, k.rhs(), &mut ops);
    (ops, e)
}

/// Lattice of the whole right-hand side for `var`.
pub fn build_lattice(k: &Kernel, var: &str) -> Result<MergeLattice> {
    if !k.index_vars().iter().any(|v| v == var) {
        return Err(Error::EmptyLattice(var.to_string()));
    }
    let (ops, e) = operands(k);
    Ok(lattice_for(&e, var, &ops))
}

/// Text dump of the lattices of every variable in loop order.
pub fn lattice_text(k: &Kernel) -> Result<String> {
    let order = topo_sort(&build_iteration_graph(k))?;
    let (ops, e) = operands(k);
    let mut s = String::new();
    for (i, op) in ops.iter().enumerate() {
        let _ = writeln!(
            s,
            "operand {}{i} = {}({})",
            op.tensor,
            op.tensor,
            op.indices.join(",")
        );
    }
    for v in &order {
        s.push_str(&lattice_for(&e, v, &ops).text(&ops));
    }
    Ok(s)
}
