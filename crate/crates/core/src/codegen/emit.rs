use std::fmt::Write as _;

use super::ir::{Case, Iter, Program, Stmt, Value};
use crate::io::format_value;

struct Emitter<'a> {
    p: &'a Program,
    out: String,
}

impl Emitter<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn var(&self, v: usize) -> &str {
        &self.p.vars[v]
    }

    fn iter(&self, it: Iter) -> String {
        self.p.operands[it.operand].iter_name(it.operand, it.level)
    }

    /// Position of an operand's parent level, `0` at the root.
    fn parent(&self, it: Iter) -> String {
        if it.level == 0 {
            "0".into()
        } else {
            self.iter(Iter {
                operand: it.operand,
                level: it.level - 1,
            })
        }
    }

    fn crd(&self, it: Iter) -> String {
        format!("{}.crd", self.iter(it))
    }

    fn lhs(&self) -> String {
        let vars = &self.p.kernel.lhs().indices;
        format!("{}[{}]", self.p.kernel.lhs().tensor, vars.join(","))
    }

    fn value(&self, v: &Value) -> String {
        fn prec(v: &Value) -> u8 {
            match v {
                Value::Add(..) | Value::Sub(..) => 1,
                Value::Mul(..) => 2,
                Value::Neg(_) => 3,
                Value::Const(c) if c.is_sign_negative() => 3,
                _ => 4,
            }
        }
        let wrap = |x: &Value, parens: bool| {
            let s = self.value(x);
            if parens {
                format!("({s})")
            } else {
                s
            }
        };
        match v {
            Value::Load(a) => {
                let op = &self.p.operands[*a];
                match op.ttype.encoding() {
                    Some(e) => format!(
                        "{}[{}]",
                        op.tensor,
                        self.iter(Iter {
                            operand: *a,
                            level: e.rank() - 1,
                        })
                    ),
                    None => format!("{}[{}]", op.tensor, op.indices.join(",")),
                }
            }
            Value::Const(c) => format_value(*c),
            Value::Reg(r) => format!("r{r}"),
            Value::Neg(x) => format!("-{}", wrap(x, prec(x) < 4)),
            Value::Add(l, r) | Value::Sub(l, r) | Value::Mul(l, r) => {
                let p = prec(v);
                let op = match v {
                    Value::Add(..) => "+",
                    Value::Sub(..) => "-",
                    _ => "*",
                };
                format!("{} {op} {}", wrap(l, prec(l) < p), wrap(r, prec(r) <= p))
            }
        }
    }

    fn cases(&mut self, depth: usize, var: usize, iters: &[Iter], cases: &[Case]) {
        for (i, c) in cases.iter().enumerate() {
            let cond: Vec<String> = c
                .iters
                .iter()
                .map(|&it| format!("{} == {}", self.crd(it), self.var(var)))
                .collect();
            let head = match (i, cond.is_empty()) {
                (_, true) if i > 0 => "else:".to_string(),
                (_, true) => "if true:".to_string(),
                (0, false) => format!("if {}:", cond.join(" && ")),
                _ => format!("else if {}:", cond.join(" && ")),
            };
            self.line(depth, &head);
            self.block(depth + 1, &c.body);
        }
        for &it in iters {
            let t = format!(
                "advance {} if {} == {}",
                self.iter(it),
                self.crd(it),
                self.var(var)
            );
            self.line(depth, &t);
        }
    }

    fn load_crd(&mut self, depth: usize, it: Iter) {
        let op = &self.p.operands[it.operand];
        let t = format!(
            "{} = {}.indices[{}][{}]",
            self.crd(it),
            op.tensor,
            it.level,
            self.iter(it)
        );
        self.line(depth, &t);
    }

    fn block(&mut self, depth: usize, body: &[Stmt]) {
        for s in body {
            self.stmt(depth, s);
        }
    }

    fn stmt(&mut self, d: usize, s: &Stmt) {
        match s {
            Stmt::ForDense { var, extent, body } => {
                let t = format!("for {} in [0,{extent}):", self.var(*var));
                self.line(d, &t);
                self.block(d + 1, body);
            }
            Stmt::ForPositions { var, iter, body } => {
                let n = self.iter(*iter);
                self.line(d, &format!("for {n} in [{n}.lo,{n}.hi):"));
                let op = &self.p.operands[iter.operand];
                let t = format!(
                    "{} = {}.indices[{}][{n}]",
                    self.var(*var),
                    op.tensor,
                    iter.level
                );
                self.line(d + 1, &t);
                self.block(d + 1, body);
            }
            Stmt::WhileCoiter { var, iters, cases } => {
                let cond: Vec<String> = iters
                    .iter()
                    .map(|&it| {
                        let n = self.iter(it);
                        format!("{n} < {n}.hi")
                    })
                    .collect();
                self.line(d, &format!("while {}:", cond.join(" && ")));
                for &it in iters {
                    self.load_crd(d + 1, it);
                }
                let crds: Vec<String> = iters.iter().map(|&it| self.crd(it)).collect();
                let t = if crds.len() == 1 {
                    format!("{} = {}", self.var(*var), crds[0])
                } else {
                    format!("{} = min({})", self.var(*var), crds.join(", "))
                };
                self.line(d + 1, &t);
                self.cases(d + 1, *var, iters, cases);
            }
            Stmt::ForCoiter {
                var,
                extent,
                iters,
                cases,
            } => {
                let t = format!("for {} in [0,{extent}):", self.var(*var));
                self.line(d, &t);
                for &it in iters {
                    let n = self.iter(it);
                    let op = &self.p.operands[it.operand];
                    let t = format!(
                        "{}.crd = {n} < {n}.hi ? {}.indices[{}][{n}] : none",
                        n, op.tensor, it.level
                    );
                    self.line(d + 1, &t);
                }
                self.cases(d + 1, *var, iters, cases);
            }
            Stmt::LoadRange { iter } => {
                let n = self.iter(*iter);
                let op = &self.p.operands[iter.operand];
                let parent = self.parent(*iter);
                let hi = if parent == "0" {
                    "1".to_string()
                } else {
                    format!("{parent} + 1")
                };
                let t = format!(
                    "{n}.lo, {n}.hi = {t}.pointers[{l}][{parent}], {t}.pointers[{l}][{hi}]",
                    t = op.tensor,
                    l = iter.level
                );
                self.line(d, &t);
            }
            Stmt::Locate {
                operand,
                level,
                var,
            } => {
                let it = Iter {
                    operand: *operand,
                    level: *level,
                };
                let n = self.iter(it);
                let t = if *level == 0 {
                    format!("{n} = {}", self.var(*var))
                } else {
                    let op = &self.p.operands[*operand];
                    let enc = op.ttype.encoding().expect("located operands are encoded");
                    let extent = op.ttype.shape()[enc.dim_of_level(*level)];
                    format!("{n} = {} * {extent} + {}", self.parent(it), self.var(*var))
                };
                self.line(d, &t);
            }
            Stmt::ScalarInit { reg } => self.line(d, &format!("r{reg} = 0")),
            Stmt::Accumulate { reg, value } => {
                let t = format!("r{reg} += {}", self.value(value));
                self.line(d, &t);
            }
            Stmt::ClearTouched => self.line(d, "touched = false"),
            Stmt::Touch => self.line(d, "touched = true"),
            Stmt::IfTouched { body } => {
                self.line(d, "if touched:");
                self.block(d + 1, body);
            }
            Stmt::StoreDense { value } => {
                let t = format!("{} += {}", self.lhs(), self.value(value));
                self.line(d, &t);
            }
            Stmt::InsertLex { value } => {
                let k = &self.p.kernel;
                let t = format!(
                    "insert {}({}) = {}",
                    k.lhs().tensor,
                    k.lhs().indices.join(","),
                    self.value(value)
                );
                self.line(d, &t);
            }
            Stmt::StoreInPlace { operand, value } => {
                let op = &self.p.operands[*operand];
                let last = op.ttype.rank() - 1;
                let t = format!(
                    "{}[{}] = {}",
                    op.tensor,
                    self.iter(Iter {
                        operand: *operand,
                        level: last,
                    }),
                    self.value(value)
                );
                self.line(d, &t);
            }
            Stmt::ExpandWs { extent } => self.line(d, &format!("ws = expand({extent})")),
            Stmt::ScatterWs { var, value } => {
                let t = format!("ws[{}] += {}", self.var(*var), self.value(value));
                self.line(d, &t);
            }
            Stmt::CompressWs { prefix } => {
                let mut coords: Vec<&str> = prefix.iter().map(|&v| self.var(v)).collect();
                coords.push(":");
                let t = format!(
                    "compress ws into {}({})",
                    self.p.kernel.lhs().tensor,
                    coords.join(",")
                );
                self.line(d, &t);
            }
        }
    }
}

/// Indented pseudo-code for a program. The output depends only on the
/// program, so it can be compared against stored text.
pub fn emit_text(p: &Program) -> String {
    let mut e = Emitter {
        p,
        out: String::new(),
    };
    e.block(0, &p.body);
    e.out
}

/// Header comments naming the kernel, loop order and output strategy.
pub fn emit_header(p: &Program) -> String {
    let k = &p.kernel;
    let mut s = String::new();
    let _ = writeln!(s, "# {} = {}", k.lhs(), k.rhs());
    let _ = writeln!(s, "# order: {}", p.vars.join(","));
    let _ = writeln!(s, "# output: {:?}", p.strategy);
    s
}

/// Header followed by the statements; what `--emit=ir` prints per program.
pub fn emit_program(p: &Program) -> String {
    emit_header(p) + &emit_text(p)
}
