//! Tree-walking interpreter for lowered programs.

use std::collections::HashMap;

use super::Tensor;
use crate::codegen::{Case, Iter, OutputStrategy, Program, Stmt, Value};
use crate::error::{Error, Result};
use crate::expr::AssignOp;
use crate::storage::{row_major_strides, DenseTensor, SparseBuilder, SparseStorage, Workspace};

enum Level<'a> {
    Dense {
        extent: usize,
    },
    Compressed {
        pointers: &'a [usize],
        indices: &'a [usize],
    },
}

/// Read access to one operand.
enum Source<'a> {
    Sparse {
        levels: Vec<Level<'a>>,
        values: &'a [f64],
    },
    /// Row-major data with `(var, stride)` per dimension.
    Dense {
        data: &'a [f64],
        terms: Vec<(usize, usize)>,
    },
}

enum Output {
    Dense { t: DenseTensor, strides: Vec<usize> },
    Builder(SparseBuilder),
    InPlace(SparseStorage),
}

struct Env<'a> {
    sources: Vec<Source<'a>>,
    /// Slots per operand in `pos`/`hi`.
    stride: usize,
    vars: Vec<usize>,
    pos: Vec<usize>,
    hi: Vec<usize>,
    regs: [f64; 1],
    touched: bool,
    ws: Option<Workspace>,
    out: Output,
    lhs_vars: Vec<usize>,
    coords: Vec<usize>,
}

impl<'a> Env<'a> {
    fn slot(&self, it: Iter) -> usize {
        it.operand * self.stride + it.level
    }

    fn compressed(&self, it: Iter) -> (&'a [usize], &'a [usize]) {
        match &self.sources[it.operand] {
            Source::Sparse { levels, .. } => match levels[it.level] {
                Level::Compressed { pointers, indices } => (pointers, indices),
                Level::Dense { .. } => panic!("iterator over a dense level"),
            },
            Source::Dense { .. } => panic!("iterator over a dense operand"),
        }
    }

    /// Coordinate of an iterator, or `None` once exhausted.
    fn crd(&self, it: Iter) -> Option<usize> {
        let s = self.slot(it);
        let p = self.pos[s];
        (p < self.hi[s]).then(|| self.compressed(it).1[p])
    }

    fn parent_pos(&self, it: Iter) -> usize {
        if it.level == 0 {
            0
        } else {
            self.pos[self.slot(Iter {
                operand: it.operand,
                level: it.level - 1,
            })]
        }
    }

    fn eval(&self, v: &Value) -> f64 {
        match v {
            Value::Load(a) => match &self.sources[*a] {
                Source::Sparse { levels, values } => {
                    values[self.pos[self.slot(Iter {
                        operand: *a,
                        level: levels.len() - 1,
                    })]]
                }
                Source::Dense { data, terms } => {
                    data[terms.iter().map(|&(v, s)| self.vars[v] * s).sum::<usize>()]
                }
            },
            Value::Const(c) => *c,
            Value::Reg(r) => self.regs[*r],
            Value::Neg(x) => -self.eval(x),
            Value::Add(l, r) => self.eval(l) + self.eval(r),
            Value::Sub(l, r) => self.eval(l) - self.eval(r),
            Value::Mul(l, r) => self.eval(l) * self.eval(r),
        }
    }

    fn block(&mut self, body: &[Stmt]) -> Result<()> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn dispatch(&mut self, var: usize, iters: &[Iter], cases: &[Case], i: usize) -> Result<()> {
        self.vars[var] = i;
        let matched: Vec<bool> = iters.iter().map(|&it| self.crd(it) == Some(i)).collect();
        let hit = |it: &Iter| {
            iters
                .iter()
                .position(|x| x == it)
                .is_some_and(|k| matched[k])
        };
        if let Some(c) = cases.iter().find(|c| c.iters.iter().all(hit)) {
            self.block(&c.body)?;
        }
        for (k, &it) in iters.iter().enumerate() {
            if matched[k] {
                let s = self.slot(it);
                self.pos[s] += 1;
            }
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        match s {
            Stmt::ForDense { var, extent, body } => {
                for i in 0..*extent {
                    self.vars[*var] = i;
                    self.block(body)?;
                }
            }
            Stmt::ForPositions { var, iter, body } => {
                let slot = self.slot(*iter);
                let indices = self.compressed(*iter).1;
                let (lo, hi) = (self.pos[slot], self.hi[slot]);
                for p in lo..hi {
                    self.pos[slot] = p;
                    self.vars[*var] = indices[p];
                    self.block(body)?;
                }
                self.pos[slot] = hi;
            }
            Stmt::WhileCoiter { var, iters, cases } => loop {
                let mut min = usize::MAX;
                for &it in iters {
                    match self.crd(it) {
                        Some(c) => min = min.min(c),
                        None => return Ok(()),
                    }
                }
                self.dispatch(*var, iters, cases, min)?;
            },
            Stmt::ForCoiter {
                var,
                extent,
                iters,
                cases,
            } => {
                for i in 0..*extent {
                    self.dispatch(*var, iters, cases, i)?;
                }
            }
            Stmt::LoadRange { iter } => {
                let parent = self.parent_pos(*iter);
                let pointers = self.compressed(*iter).0;
                let slot = self.slot(*iter);
                self.pos[slot] = pointers[parent];
                self.hi[slot] = pointers[parent + 1];
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
                let extent = match &self.sources[*operand] {
                    Source::Sparse { levels, .. } => match levels[*level] {
                        Level::Dense { extent } => extent,
                        Level::Compressed { .. } => panic!("locate on a compressed level"),
                    },
                    Source::Dense { .. } => panic!("locate on an unencoded operand"),
                };
                let p = self.parent_pos(it) * extent + self.vars[*var];
                let slot = self.slot(it);
                self.pos[slot] = p;
            }
            Stmt::ScalarInit { reg } => self.regs[*reg] = 0.0,
            Stmt::Accumulate { reg, value } => self.regs[*reg] += self.eval(value),
            Stmt::ClearTouched => self.touched = false,
            Stmt::Touch => self.touched = true,
            Stmt::IfTouched { body } => {
                if self.touched {
                    self.block(body)?;
                }
            }
            Stmt::StoreDense { value } => {
                let v = self.eval(value);
                let Output::Dense { t, strides } = &mut self.out else {
                    panic!("dense store into a sparse output");
                };
                let off: usize = self
                    .lhs_vars
                    .iter()
                    .zip(strides.iter())
                    .map(|(&x, s)| self.vars[x] * s)
                    .sum();
                t.data_mut()[off] += v;
            }
            Stmt::InsertLex { value } => {
                let v = self.eval(value);
                for (c, &x) in self.coords.iter_mut().zip(&self.lhs_vars) {
                    *c = self.vars[x];
                }
                let Output::Builder(b) = &mut self.out else {
                    panic!("insertion into a non-builder output");
                };
                b.insert(&self.coords, v)?;
            }
            Stmt::StoreInPlace { operand, value } => {
                let v = self.eval(value);
                let Source::Sparse { levels, .. } = &self.sources[*operand] else {
                    panic!("in-place store through an unencoded operand");
                };
                let p = self.pos[self.slot(Iter {
                    operand: *operand,
                    level: levels.len() - 1,
                })];
                let Output::InPlace(s) = &mut self.out else {
                    panic!("in-place store without an aliased output");
                };
                s.values_mut()[p] = v;
            }
            Stmt::ExpandWs { extent } => self.ws = Some(Workspace::expand(*extent)),
            Stmt::ScatterWs { var, value } => {
                let v = self.eval(value);
                let i = self.vars[*var];
                self.ws.as_mut().expect("workspace expanded").scatter(i, v);
            }
            Stmt::CompressWs { prefix } => {
                let prefix: Vec<usize> = prefix.iter().map(|&v| self.vars[v]).collect();
                let Output::Builder(b) = &mut self.out else {
                    panic!("compress into a non-builder output");
                };
                self.ws
                    .as_mut()
                    .expect("workspace expanded")
                    .compress(b, &prefix)?;
            }
        }
        Ok(())
    }
}

/// Runs a program against bound tensors. Every operand must be bound with
/// the layout its declaration asks for; a dense `+=` output starts from the
/// bound value of the output tensor.
pub fn interpret(p: &Program, inputs: &HashMap<String, &Tensor>) -> Result<Tensor> {
    let k = &p.kernel;
    let lookup = |name: &str| {
        inputs
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingInput(name.to_string()))
    };
    let mut sources = Vec::with_capacity(p.operands.len());
    for op in &p.operands {
        let t = lookup(&op.tensor)?;
        super::check_binding(&op.tensor, &op.ttype, t)?;
        sources.push(match t {
            Tensor::Sparse(s) => {
                let enc = s.encoding();
                let levels = (0..enc.rank())
                    .map(|l| {
                        if enc.level_type(l).is_compressed() {
                            Level::Compressed {
                                pointers: s.pointers_raw(l),
                                indices: s.indices_raw(l),
                            }
                        } else {
                            Level::Dense {
                                extent: s.level_extent(l),
                            }
                        }
                    })
                    .collect();
                Source::Sparse {
                    levels,
                    values: s.values_view(),
                }
            }
            Tensor::Dense(d) => {
                let strides = row_major_strides(d.shape());
                let terms = op
                    .indices
                    .iter()
                    .zip(strides)
                    .map(|(v, s)| (p.var_id(v).expect("operand var in loop order"), s))
                    .collect();
                Source::Dense {
                    data: d.data(),
                    terms,
                }
            }
        });
    }
    let out_type = k.output_type();
    let out = match &p.strategy {
        OutputStrategy::DenseStore => {
            let t = if k.op() == AssignOp::AddAssign {
                let prev = lookup(&k.lhs().tensor)?;
                super::check_binding(&k.lhs().tensor, out_type, prev)?;
                prev.to_dense()
            } else {
                DenseTensor::zeros(out_type.shape().to_vec())
            };
            let strides = row_major_strides(t.shape());
            Output::Dense { t, strides }
        }
        OutputStrategy::DirectLex | OutputStrategy::ExpandCompress { .. } => {
            Output::Builder(SparseBuilder::new(
                out_type.shape().to_vec(),
                out_type.encoding().expect("sparse output").clone(),
            )?)
        }
        OutputStrategy::InPlace { operand } => match lookup(&p.operands[*operand].tensor)? {
            Tensor::Sparse(s) => Output::InPlace(s.clone()),
            Tensor::Dense(_) => unreachable!("checked binding is sparse"),
        },
    };
    let stride = p
        .operands
        .iter()
        .map(|o| o.ttype.rank())
        .max()
        .unwrap_or(0)
        .max(1);
    let slots = stride * p.operands.len();
    let lhs_vars = p.lhs_vars();
    let mut env = Env {
        sources,
        stride,
        vars: vec![0; p.vars.len()],
        pos: vec![0; slots],
        hi: vec![0; slots],
        regs: [0.0],
        touched: false,
        ws: None,
        out,
        coords: vec![0; lhs_vars.len()],
        lhs_vars,
    };
    env.block(&p.body)?;
    Ok(match env.out {
        Output::Dense { t, .. } => match out_type.encoding() {
            Some(e) => Tensor::Sparse(SparseStorage::pack(&t.to_coo(), e)?),
            None => Tensor::Dense(t),
        },
        Output::Builder(b) => Tensor::Sparse(b.finish()?),
        Output::InPlace(s) => Tensor::Sparse(s),
    })
}
