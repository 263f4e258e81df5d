//! Implicit reductions and expression splitting.

use super::ast::{Access, AssignOp, Expr, Kernel, TensorDecl};
use crate::encoding::{Encoding, LevelType, TensorType};

/// A variable that only occurs on the right-hand side and is summed over.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub var: String,
    /// Path to the smallest subexpression containing every use of `var`.
    pub scope: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedKernel {
    pub kernel: Kernel,
    /// Left-hand side variables, in order.
    pub free_vars: Vec<String>,
    pub reductions: Vec<Reduction>,
    /// For every right-hand side access (left to right), the free variables
    /// it does not use, i.e. the dimensions it is broadcast along.
    pub broadcasts: Vec<Vec<String>>,
}

impl AnnotatedKernel {
    pub fn is_reduction(&self, var: &str) -> bool {
        self.reductions.iter().any(|r| r.var == var)
    }

    pub fn reduction_vars(&self) -> Vec<&str> {
        self.reductions.iter().map(|r| r.var.as_str()).collect()
    }

    /// Scope of a reduction lifted through enclosing products and negations.
    /// Summing there gives the same value since the extra factors do not
    /// depend on the reduction variable.
    pub fn split_scope(&self, var: &str) -> Option<Vec<usize>> {
        let r = self.reductions.iter().find(|r| r.var == var)?;
        let mut path = r.scope.clone();
        while let Some((_, parent)) = path.split_last() {
            match self.kernel.rhs().at(parent) {
                Expr::Mul(..) | Expr::Neg(_) => {
                    path.pop();
                }
                _ => break,
            }
        }
        Some(path)
    }
}

/// Paths of every access in left-to-right order.
pub fn access_paths(e: &Expr) -> Vec<(Vec<usize>, &Access)> {
    fn walk<'a>(e: &'a Expr, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Access)>) {
        if let Expr::Access(a) = e {
            out.push((path.clone(), a));
        }
        for (i, c) in e.children().into_iter().enumerate() {
            path.push(i);
            walk(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(e, &mut Vec::new(), &mut out);
    out
}

fn common_prefix(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .zip(b)
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| *x)
        .collect()
}

/// Classifies index variables as free or reduced and finds where each
/// reduction applies.
pub fn analyze_reductions(k: &Kernel) -> AnnotatedKernel {
    let free_vars = k.lhs().indices.clone();
    let paths = access_paths(k.rhs());
    let mut reductions = Vec::new();
    for v in k.rhs().vars() {
        if free_vars.contains(&v) {
            continue;
        }
        let scope = paths
            .iter()
            .filter(|(_, a)| a.dim_of(&v).is_some())
            .map(|(p, _)| p.clone())
            .reduce(|acc, p| common_prefix(&acc, &p))
            .unwrap_or_default();
        reductions.push(Reduction { var: v, scope });
    }
    let broadcasts = paths
        .iter()
        .map(|(_, a)| {
            free_vars
                .iter()
                .filter(|v| a.dim_of(v).is_none())
                .cloned()
                .collect()
        })
        .collect();
    AnnotatedKernel {
        kernel: k.clone(),
        free_vars,
        reductions,
        broadcasts,
    }
}

/// Whether the result of `e` would be sparse along `var`: accesses are
/// sparse along their compressed dimensions, sums only when both operands
/// are, products when either is.
fn sparse_along(k: &Kernel, decls: &[TensorDecl], e: &Expr, var: &str) -> bool {
    match e {
        Expr::Access(a) => {
            let t = decls
                .iter()
                .find(|d| d.name == a.tensor)
                .map(|d| &d.ttype)
                .unwrap_or_else(|| k.tensor(&a.tensor).expect("validated"));
            a.dim_of(var)
                .is_some_and(|d| t.dim_level_type(d).is_compressed())
        }
        Expr::Const(_) => false,
        Expr::Neg(x) => sparse_along(k, decls, x, var),
        Expr::Add(l, r) | Expr::Sub(l, r) => {
            sparse_along(k, decls, l, var) && sparse_along(k, decls, r, var)
        }
        Expr::Mul(l, r) => sparse_along(k, decls, l, var) || sparse_along(k, decls, r, var),
    }
}

struct Splitter<'a> {
    ann: &'a AnnotatedKernel,
    scopes: Vec<(String, Vec<usize>)>,
    /// Declarations of temporaries created so far.
    temps: Vec<TensorDecl>,
    kernels: Vec<Kernel>,
}

impl Splitter<'_> {
    fn kernel(&self) -> &Kernel {
        &self.ann.kernel
    }

    fn fresh_name(&self) -> String {
        let taken = |n: &str| {
            self.kernel().tensors().iter().any(|t| t.name == n)
                || self.temps.iter().any(|t| t.name == n)
        };
        let mut n = 0;
        loop {
            let name = if n == 0 {
                "T".to_string()
            } else {
                format!("T{n}")
            };
            if !taken(&name) {
                return name;
            }
            n += 1;
        }
    }

    fn decl(&self, name: &str) -> TensorDecl {
        self.kernel()
            .tensors()
            .iter()
            .chain(&self.temps)
            .find(|t| t.name == name)
            .cloned()
            .expect("declared")
    }

    fn rewrite(&mut self, e: &Expr, path: &mut Vec<usize>) -> Expr {
        let mut sub = |s: &mut Self, i: usize, c: &Expr| {
            path.push(i);
            let r = s.rewrite(c, path);
            path.pop();
            r
        };
        let e = match e {
            Expr::Access(_) | Expr::Const(_) => e.clone(),
            Expr::Neg(x) => Expr::neg(sub(self, 0, x)),
            Expr::Add(l, r) => {
                let l = sub(self, 0, l);
                Expr::add(l, sub(self, 1, r))
            }
            Expr::Sub(l, r) => {
                let l = sub(self, 0, l);
                Expr::sub(l, sub(self, 1, r))
            }
            Expr::Mul(l, r) => {
                let l = sub(self, 0, l);
                Expr::mul(l, sub(self, 1, r))
            }
        };
        if path.is_empty() || !self.scopes.iter().any(|(_, p)| p == path) {
            return e;
        }
        self.extract(e, path)
    }

    /// Moves `e` into a new temporary kernel and returns an access to it.
    fn extract(&mut self, e: Expr, path: &[usize]) -> Expr {
        let reduced: Vec<&str> = self
            .scopes
            .iter()
            .filter(|(_, p)| p == path)
            .map(|(v, _)| v.as_str())
            .collect();
        let used = e.vars();
        let vars: Vec<String> = self
            .kernel()
            .index_vars()
            .into_iter()
            .filter(|v| used.contains(v) && !reduced.contains(&v.as_str()))
            .collect();
        let shape: Vec<usize> = vars
            .iter()
            .map(|v| self.kernel().var_extent(v).expect("bound"))
            .collect();
        let levels: Vec<LevelType> = vars
            .iter()
            .map(|v| {
                if sparse_along(self.kernel(), &self.temps, &e, v) {
                    LevelType::Compressed
                } else {
                    LevelType::Dense
                }
            })
            .collect();
        let encoding = if levels.iter().any(|l| l.is_compressed()) {
            Some(Encoding::with_levels(&levels).expect("rank matches"))
        } else {
            None
        };
        let name = self.fresh_name();
        let temp = TensorDecl {
            name: name.clone(),
            ttype: TensorType::new(shape, encoding).expect("extents are positive"),
        };
        self.temps.push(temp.clone());
        let mut names: Vec<String> = e.accesses().iter().map(|a| a.tensor.clone()).collect();
        names.dedup();
        let mut decls = Vec::new();
        for n in names {
            if !decls.iter().any(|d: &TensorDecl| d.name == n) {
                decls.push(self.decl(&n));
            }
        }
        decls.push(temp);
        let var_refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let lhs = Access::new(&name, &var_refs);
        let k = Kernel::new(decls, Vec::new(), lhs.clone(), AssignOp::Assign, e)
            .expect("subexpression of a valid kernel");
        self.kernels.push(k);
        Expr::Access(lhs)
    }
}

/// Splits a kernel whose reductions apply to proper subexpressions into a
/// sequence of kernels: one per such subexpression, writing a temporary,
/// followed by the remaining assignment. Executing them in order gives the
/// result of the original kernel. Kernels whose reductions all span the
/// whole right-hand side come back unchanged.
pub fn split_for_whole_expr_reduction(ann: &AnnotatedKernel) -> Vec<Kernel> {
    let scopes: Vec<(String, Vec<usize>)> = ann
        .reductions
        .iter()
        .map(|r| (r.var.clone(), ann.split_scope(&r.var).expect("reduction")))
        .collect();
    if scopes.iter().all(|(_, p)| p.is_empty()) {
        return vec![ann.kernel.clone()];
    }
    let mut s = Splitter {
        ann,
        scopes,
        temps: Vec::new(),
        kernels: Vec::new(),
    };
    let rhs = s.rewrite(ann.kernel.rhs(), &mut Vec::new());
    let k = &ann.kernel;
    let mut decls = k.tensors().to_vec();
    decls.extend(s.temps.iter().cloned());
    let rest = Kernel::new(
        decls,
        k.declared_vars().to_vec(),
        k.lhs().clone(),
        k.op(),
        rhs,
    )
    .expect("rewritten kernel stays valid");
    s.kernels.push(rest);
    s.kernels
}

/// Rewrites `X(..) += e` into `X(..) = X(..) + e`.
pub fn expand_accumulate(k: &Kernel) -> Kernel {
    if k.op() == AssignOp::Assign {
        return k.clone();
    }
    let rhs = Expr::add(Expr::Access(k.lhs().clone()), k.rhs().clone());
    Kernel::new(
        k.tensors().to_vec(),
        k.declared_vars().to_vec(),
        k.lhs().clone(),
        AssignOp::Assign,
        rhs,
    )
    .expect("adding the output access keeps the kernel valid")
}
