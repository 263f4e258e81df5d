//! Reference evaluation and input generation.
//!
//! [`dense_eval`] reads index notation as plain nested loops over dense
//! arrays. It does not use the compiler or the runtime, so agreement with
//! [`crate::exec::run_kernel`] is an independent check.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{analyze_reductions, AssignOp, Expr, Kernel};
use crate::storage::{CooTensor, DenseTensor};

struct Eval<'a> {
    k: &'a Kernel,
    inputs: &'a HashMap<String, DenseTensor>,
    /// Reduction variables keyed by the path of the subexpression they sum.
    scopes: Vec<(Vec<usize>, String)>,
    values: HashMap<String, usize>,
}

impl Eval<'_> {
    fn node(&mut self, e: &Expr, path: &mut Vec<usize>) -> f64 {
        let here: Vec<String> = self
            .scopes
            .iter()
            .filter(|(p, _)| p == path)
            .map(|(_, v)| v.clone())
            .collect();
        if here.is_empty() {
            return self.plain(e, path);
        }
        let extents: Vec<usize> = here
            .iter()
            .map(|v| self.k.var_extent(v).expect("bound"))
            .collect();
        let mut sum = 0.0;
        let mut idx = vec![0usize; here.len()];
        if extents.contains(&0) {
            return 0.0;
        }
        loop {
            for (v, &i) in here.iter().zip(&idx) {
                self.values.insert(v.clone(), i);
            }
            sum += self.plain(e, path);
            // Odometer step, last variable fastest.
            let mut d = here.len();
            loop {
                if d == 0 {
                    return sum;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < extents[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    fn plain(&mut self, e: &Expr, path: &mut Vec<usize>) -> f64 {
        let mut child = |s: &mut Self, i: usize, c: &Expr| {
            path.push(i);
            let v = s.node(c, path);
            path.pop();
            v
        };
        match e {
            Expr::Access(a) => {
                let t = &self.inputs[&a.tensor];
                let coords: Vec<usize> = a.indices.iter().map(|v| self.values[v]).collect();
                t.get(&coords)
            }
            Expr::Const(c) => *c,
            Expr::Neg(x) => -child(self, 0, x),
            Expr::Add(l, r) => child(self, 0, l) + child(self, 1, r),
            Expr::Sub(l, r) => child(self, 0, l) - child(self, 1, r),
            Expr::Mul(l, r) => child(self, 0, l) * child(self, 1, r),
        }
    }
}

/// Evaluates a kernel over dense inputs with full nested loops. Each
/// reduction variable sums the smallest subexpression using it. For `+=`
/// the previous output must be among the inputs.
pub fn dense_eval(k: &Kernel, inputs: &HashMap<String, DenseTensor>) -> Result<DenseTensor> {
    let mut needed = k.input_names();
    if k.op() == AssignOp::AddAssign {
        needed.push(k.lhs().tensor.clone());
    }
    for name in &needed {
        let t = inputs
            .get(name)
            .ok_or_else(|| Error::MissingInput(name.clone()))?;
        let declared = k.tensor(name)?.shape();
        if t.shape() != declared {
            return Err(Error::ShapeMismatch(format!(
                "`{name}` is declared {declared:?} but has shape {:?}",
                t.shape()
            )));
        }
    }
    let ann = analyze_reductions(k);
    let out_shape = k.output_type().shape().to_vec();
    let mut out = match k.op() {
        AssignOp::AddAssign => inputs[&k.lhs().tensor].clone(),
        AssignOp::Assign => DenseTensor::zeros(out_shape.clone()),
    };
    let mut ev = Eval {
        k,
        inputs,
        scopes: ann
            .reductions
            .iter()
            .map(|r| (r.scope.clone(), r.var.clone()))
            .collect(),
        values: HashMap::new(),
    };
    let vars = &k.lhs().indices;
    let volume: usize = out_shape.iter().product();
    let mut coords = vec![0usize; vars.len()];
    for flat in 0..volume {
        let mut rest = flat;
        for d in (0..vars.len()).rev() {
            coords[d] = rest % out_shape[d];
            rest /= out_shape[d];
        }
        for (v, &c) in vars.iter().zip(&coords) {
            ev.values.insert(v.clone(), c);
        }
        let v = ev.node(k.rhs(), &mut Vec::new());
        let prev = out.get(&coords);
        out.set(&coords, prev + v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Each coordinate present independently with probability `density`.
    UniformRandom {
        density: f64,
        seed: u64,
    },
    /// `rows` randomly chosen rows (first dimension) filled completely.
    RowBand {
        rows: usize,
        seed: u64,
    },
    /// Ones on the main diagonal.
    Identity,
    Explicit(CooTensor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub shape: Vec<usize>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, shape: Vec<usize>) -> Self {
        GeneratorSpec { kind, shape }
    }
}

/// Uniform in (0, 1], never exactly zero.
fn value(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Builds a coordinate list; the same spec always gives the same tensor.
pub fn generate(spec: &GeneratorSpec) -> CooTensor {
    let shape = spec.shape.clone();
    let volume: usize = shape.iter().product();
    let mut coo = CooTensor::new(shape.clone());
    let mut coords = vec![0usize; shape.len()];
    let unravel = |mut flat: usize, coords: &mut [usize]| {
        for d in (0..shape.len()).rev() {
            coords[d] = flat % shape[d];
            flat /= shape[d];
        }
    };
    match &spec.kind {
        GeneratorKind::UniformRandom { density, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let p = density.clamp(0.0, 1.0);
            for flat in 0..volume {
                if rng.gen_bool(p) {
                    unravel(flat, &mut coords);
                    let v = value(&mut rng);
                    coo.push(&coords, v).expect("in bounds");
                }
            }
        }
        GeneratorKind::RowBand { rows, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = shape.first().copied().unwrap_or(0);
            let mut chosen = sample(&mut rng, n, (*rows).min(n)).into_vec();
            chosen.sort_unstable();
            let row_len = volume / n.max(1);
            for r in chosen {
                for off in 0..row_len {
                    unravel(r * row_len + off, &mut coords);
                    let v = value(&mut rng);
                    coo.push(&coords, v).expect("in bounds");
                }
            }
        }
        GeneratorKind::Identity => {
            let n = shape.iter().copied().min().unwrap_or(0);
            for i in 0..n {
                coords.iter_mut().for_each(|c| *c = i);
                coo.push(&coords, 1.0).expect("in bounds");
            }
        }
        GeneratorKind::Explicit(t) => return t.clone(),
    }
    coo
}

/// Fraction of the volume holding a nonzero value.
pub fn density(t: &CooTensor) -> f64 {
    let volume = t.volume();
    if volume == 0 {
        return 0.0;
    }
    t.nnz() as f64 / volume as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_kernel;
    use crate::fixtures;

    fn dense(shape: &[usize], data: &[f64]) -> DenseTensor {
        DenseTensor::from_data(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_by_identity() {
        let k =
            parse_kernel("tensor A(3,4)\ntensor I(4,4)\ntensor C(3,4)\nC(i,j) = A(i,k) * I(k,j)")
                .unwrap();
        let a = DenseTensor::from_coo(&fixtures::matrix_a());
        let i = DenseTensor::from_coo(&fixtures::identity(4));
        let inputs = HashMap::from([("A".to_string(), a.clone()), ("I".to_string(), i)]);
        assert_eq!(dense_eval(&k, &inputs).unwrap(), a);
    }

    #[test]
    fn dot() {
        let k = parse_kernel("tensor a(3)\ntensor b(3)\ntensor x()\nx() = a(i) * b(i)").unwrap();
        let inputs = HashMap::from([
            ("a".to_string(), dense(&[3], &[1.0, 2.0, 3.0])),
            ("b".to_string(), dense(&[3], &[4.0, 5.0, 6.0])),
        ]);
        assert_eq!(dense_eval(&k, &inputs).unwrap().data(), &[32.0]);
    }

    #[test]
    fn mttkrp_all_ones() {
        let k = parse_kernel(
            "tensor B(2,2,2)\ntensor D(2,2)\ntensor C(2,2)\ntensor A(2,2)\nA(i,j) = B(i,k,l) * D(l,j) * C(k,j)",
        )
        .unwrap();
        let inputs = HashMap::from([
            ("B".to_string(), dense(&[2, 2, 2], &[1.0; 8])),
            ("D".to_string(), dense(&[2, 2], &[1.0; 4])),
            ("C".to_string(), dense(&[2, 2], &[1.0; 4])),
        ]);
        assert_eq!(dense_eval(&k, &inputs).unwrap().data(), &[4.0; 4]);
    }

    #[test]
    fn partial_reduction_and_accumulate() {
        // D(i) = sum_j (A(i,j) + B(i,j)) + C(i), then added to the old D.
        let k = parse_kernel("tensor A(2,3)\ntensor B(2,3)\ntensor C(2)\ntensor D(2)\nD(i) += A(i,j) + B(i,j) + C(i)")
            .unwrap();
        let inputs = HashMap::from([
            (
                "A".to_string(),
                dense(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ),
            ("B".to_string(), dense(&[2, 3], &[1.0; 6])),
            ("C".to_string(), dense(&[2], &[10.0, 20.0])),
            ("D".to_string(), dense(&[2], &[100.0, 200.0])),
        ]);
        assert_eq!(dense_eval(&k, &inputs).unwrap().data(), &[119.0, 238.0]);
    }

    #[test]
    fn shape_mismatch() {
        let k = parse_kernel("tensor a(3)\ntensor x()\nx() = a(i)").unwrap();
        let inputs = HashMap::from([("a".to_string(), dense(&[2], &[1.0, 2.0]))]);
        assert!(matches!(
            dense_eval(&k, &inputs),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn generators() {
        let spec = GeneratorSpec::new(
            GeneratorKind::UniformRandom {
                density: 0.01,
                seed: 7,
            },
            vec![1024, 1024],
        );
        let a = generate(&spec);
        assert_eq!(a, generate(&spec));
        let rho = density(&a);
        assert!((0.009..=0.011).contains(&rho), "{rho}");
        assert!(a.values().iter().all(|v| *v > 0.0 && *v <= 1.0));

        let band = generate(&GeneratorSpec::new(
            GeneratorKind::RowBand { rows: 10, seed: 1 },
            vec![64, 32],
        ));
        assert_eq!(band.nnz(), 320);
        assert!((density(&band) - 10.0 / 64.0).abs() < 1e-12);

        let id = generate(&GeneratorSpec::new(GeneratorKind::Identity, vec![4, 4]));
        assert_eq!(
            id.nonzero_set(),
            vec![vec![0, 0], vec![1, 1], vec![2, 2], vec![3, 3]]
        );
        assert_eq!(density(&id), 0.25);
    }

    #[test]
    fn densities() {
        assert_eq!(density(&fixtures::matrix_a()), 0.25);
        assert_eq!(density(&CooTensor::new(vec![3, 3])), 0.0);
    }
}
