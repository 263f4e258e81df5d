use std::collections::HashMap;
use std::fmt;

use crate::encoding::TensorType;
use crate::error::{Error, Result};
use crate::io::format_value;

/// A tensor indexed by plain index variables, e.g. `A(i,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub tensor: String,
    pub indices: Vec<String>,
}

impl Access {
    pub fn new(tensor: impl Into<String>, indices: &[&str]) -> Self {
        Access {
            tensor: tensor.into(),
            indices: indices.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Logical dimension of `var` in this access.
    pub fn dim_of(&self, var: &str) -> Option<usize> {
        self.indices.iter().position(|v| v == var)
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.tensor, self.indices.join(","))
    }
}

/// Right-hand side expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Access(Access),
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn access(tensor: &str, indices: &[&str]) -> Expr {
        Expr::Access(Access::new(tensor, indices))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Access(_) | Expr::Const(_) => vec![],
            Expr::Neg(e) => vec![e],
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => vec![l, r],
        }
    }

    /// Accesses in left-to-right order.
    pub fn accesses(&self) -> Vec<&Access> {
        let mut out = Vec::new();
        self.visit_accesses(&mut |a| out.push(a));
        out
    }

    fn visit_accesses<'a>(&'a self, f: &mut impl FnMut(&'a Access)) {
        match self {
            Expr::Access(a) => f(a),
            Expr::Const(_) => {}
            Expr::Neg(e) => e.visit_accesses(f),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => {
                l.visit_accesses(f);
                r.visit_accesses(f);
            }
        }
    }

    /// Index variables in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in self.accesses() {
            for v in &a.indices {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn uses_var(&self, var: &str) -> bool {
        self.accesses().iter().any(|a| a.dim_of(var).is_some())
    }

    /// Subtree at `path` (child positions from the root).
    pub fn at(&self, path: &[usize]) -> &Expr {
        path.iter().fold(self, |e, &i| e.children()[i])
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Access(_) => 4,
            // Negative literals print with a sign and bind like negation.
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Const(_) => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Access(a) => write!(f, "{a}"),
            Expr::Const(c) => f.write_str(&format_value(*c)),
            Expr::Neg(e) => {
                f.write_str("-")?;
                // `-(2)` keeps a negated literal distinct from the literal `-2`.
                wrap(f, e, e.precedence() < 4 || matches!(**e, Expr::Const(_)))
            }
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => {
                let p = self.precedence();
                wrap(f, l, l.precedence() < p)?;
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    _ => " * ",
                };
                f.write_str(op)?;
                wrap(f, r, r.precedence() <= p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    /// `=`: the output is rebuilt from scratch.
    Assign,
    /// `+=`: the right-hand side is added to the existing output.
    AddAssign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorDecl {
    pub name: String,
    pub ttype: TensorType,
}

/// A validated tensor index notation assignment with its declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    tensors: Vec<TensorDecl>,
    declared_vars: Vec<String>,
    lhs: Access,
    op: AssignOp,
    rhs: Expr,
}

impl Kernel {
    /// Builds a kernel and checks it: every access names a declared tensor
    /// with a matching rank, index variables bind consistent extents, and
    /// left-hand side variables either occur on the right or are declared.
    pub fn new(
        tensors: Vec<TensorDecl>,
        declared_vars: Vec<String>,
        lhs: Access,
        op: AssignOp,
        rhs: Expr,
    ) -> Result<Self> {
        let k = Kernel {
            tensors,
            declared_vars,
            lhs,
            op,
            rhs,
        };
        k.validate()?;
        Ok(k)
    }

    fn validate(&self) -> Result<()> {
        let mut names = HashMap::new();
        for (i, t) in self.tensors.iter().enumerate() {
            if names.insert(t.name.as_str(), i).is_some() {
                return Err(Error::Unsupported(format!(
                    "tensor `{}` declared twice",
                    t.name
                )));
            }
        }
        let mut extents: HashMap<&str, usize> = HashMap::new();
        for a in std::iter::once(&self.lhs).chain(self.rhs.accesses()) {
            let t = self.tensor(&a.tensor)?;
            if t.rank() != a.indices.len() {
                return Err(Error::RankMismatch {
                    expected: t.rank(),
                    found: a.indices.len(),
                });
            }
            for (d, v) in a.indices.iter().enumerate() {
                if a.indices[..d].contains(v) {
                    return Err(Error::Unsupported(format!(
                        "index `{v}` repeated in access {a}"
                    )));
                }
                let n = t.shape()[d];
                match extents.insert(v, n) {
                    Some(m) if m != n => {
                        return Err(Error::ShapeMismatch(format!(
                            "index `{v}` ranges over {m} and {n}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let rhs_vars = self.rhs.vars();
        for v in &self.lhs.indices {
            if !rhs_vars.contains(v) && !self.declared_vars.contains(v) {
                return Err(Error::UndeclaredIndexVar(v.clone()));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> &[TensorDecl] {
        &self.tensors
    }

    pub fn tensor(&self, name: &str) -> Result<&TensorType> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .map(|t| &t.ttype)
            .ok_or_else(|| Error::UnknownTensor(name.to_string()))
    }

    /// The same kernel with one tensor retyped; the shape may not change.
    pub fn with_tensor_type(&self, name: &str, ttype: TensorType) -> Result<Kernel> {
        let old = self.tensor(name)?;
        if old.shape() != ttype.shape() {
            return Err(Error::ShapeMismatch(format!(
                "`{name}` is declared {:?}, not {:?}",
                old.shape(),
                ttype.shape()
            )));
        }
        let mut k = self.clone();
        for t in &mut k.tensors {
            if t.name == name {
                t.ttype = ttype.clone();
            }
        }
        Ok(k)
    }

    pub fn declared_vars(&self) -> &[String] {
        &self.declared_vars
    }

    pub fn lhs(&self) -> &Access {
        &self.lhs
    }

    pub fn op(&self) -> AssignOp {
        self.op
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn output_type(&self) -> &TensorType {
        self.tensor(&self.lhs.tensor).expect("validated")
    }

    /// Index variables in order of first appearance in the assignment.
    pub fn index_vars(&self) -> Vec<String> {
        let mut out = self.lhs.indices.clone();
        for v in self.rhs.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Extent of an index variable, taken from any access that uses it.
    pub fn var_extent(&self, var: &str) -> Option<usize> {
        std::iter::once(&self.lhs)
            .chain(self.rhs.accesses())
            .find_map(|a| {
                let d = a.dim_of(var)?;
                Some(self.tensor(&a.tensor).ok()?.shape()[d])
            })
    }

    /// Tensors read by the right-hand side, in order of first use.
    pub fn input_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in self.rhs.accesses() {
            if !out.contains(&a.tensor) {
                out.push(a.tensor.clone());
            }
        }
        out
    }
}

/// Canonical kernel text: declarations, optional `index` line, assignment.
impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tensors {
            let shape: Vec<_> = t.ttype.shape().iter().map(|n| n.to_string()).collect();
            write!(f, "tensor {}({})", t.name, shape.join(","))?;
            if let Some(e) = t.ttype.encoding() {
                write!(f, " {e}")?;
            }
            writeln!(f)?;
        }
        if !self.declared_vars.is_empty() {
            writeln!(f, "index {}", self.declared_vars.join(","))?;
        }
        let op = match self.op {
            AssignOp::Assign => "=",
            AssignOp::AddAssign => "+=",
        };
        writeln!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}
