use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Kernel;

/// Loop-order constraints between index variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationGraph {
    /// Variables in order of first appearance (left-hand side first).
    pub vars: Vec<String>,
    /// `(before, after, tensor)` triples, deduplicated on the variable pair.
    pub edges: Vec<(String, String, String)>,
}

/// Adds, for every access to a tensor with a sparse encoding, a chain of
/// edges over its index variables in storage level order. Tensors without an
/// encoding are random access and impose no order.
pub fn build_iteration_graph(k: &Kernel) -> IterationGraph {
    let mut edges: Vec<(String, String, String)> = Vec::new();
    for a in std::iter::once(k.lhs()).chain(k.rhs().accesses()) {
        let Some(enc) = k.tensor(&a.tensor).expect("validated").encoding() else {
            continue;
        };
        let chain: Vec<&String> = (0..enc.rank())
            .map(|l| &a.indices[enc.dim_of_level(l)])
            .collect();
        for w in chain.windows(2) {
            if !edges.iter().any(|(u, v, _)| u == w[0] && v == w[1]) {
                edges.push((w[0].clone(), w[1].clone(), a.tensor.clone()));
            }
        }
    }
    IterationGraph {
        vars: k.index_vars(),
        edges,
    }
}

impl IterationGraph {
    fn successors<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.0 == v)
            .map(|e| e.1.as_str())
    }
}

/// Kahn's algorithm; among ready variables the one appearing first wins.
pub fn topo_sort(g: &IterationGraph) -> Result<Vec<String>> {
    let mut indegree: Vec<usize> = g
        .vars
        .iter()
        .map(|v| g.edges.iter().filter(|e| &e.1 == v).count())
        .collect();
    let mut done = vec![false; g.vars.len()];
    let mut order = Vec::with_capacity(g.vars.len());
    while order.len() < g.vars.len() {
        let Some(next) = (0..g.vars.len()).find(|&i| !done[i] && indegree[i] == 0) else {
            return Err(Error::OrderConflict(find_cycle(g, &done)));
        };
        done[next] = true;
        order.push(g.vars[next].clone());
        for s in g.successors(&g.vars[next]) {
            let i = g
                .vars
                .iter()
                .position(|v| v == s)
                .expect("edge endpoints are vars");
            indegree[i] -= 1;
        }
    }
    Ok(order)
}

/// A cycle among the unsorted variables, first variable repeated at the end.
/// Every unsorted variable still has an unsorted predecessor, so walking
/// predecessors must revisit one.
fn find_cycle(g: &IterationGraph, done: &[bool]) -> Vec<String> {
    let remaining = |v: &str| g.vars.iter().position(|x| x == v).is_some_and(|i| !done[i]);
    let start = g
        .vars
        .iter()
        .zip(done)
        .find(|(_, d)| !**d)
        .map(|(v, _)| v.as_str())
        .expect("unsorted var");
    let mut path: Vec<&str> = vec![start];
    loop {
        let cur = *path.last().expect("nonempty");
        let prev = g
            .edges
            .iter()
            .find(|e| e.1 == cur && remaining(&e.0))
            .map(|e| e.0.as_str())
            .expect("unsorted var has an unsorted predecessor");
        if let Some(i) = path.iter().position(|p| *p == prev) {
            // The path runs against the edges; read it forwards from `prev`.
            let mut cycle = vec![prev.to_string()];
            cycle.extend(path[i + 1..].iter().rev().map(|s| s.to_string()));
            cycle.push(prev.to_string());
            return cycle;
        }
        path.push(prev);
    }
}

impl fmt::Display for IterationGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {}", self.vars.join(" "))?;
        if self.edges.is_empty() {
            return writeln!(f, "edges: none");
        }
        writeln!(f, "edges:")?;
        for (u, v, t) in &self.edges {
            writeln!(f, "  {u} -> {v} ({t})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_kernel;

    fn edges(g: &IterationGraph) -> Vec<(&str, &str)> {
        g.edges
            .iter()
            .map(|(u, v, _)| (u.as_str(), v.as_str()))
            .collect()
    }

    #[test]
    fn matmul_csr() {
        let k = parse_kernel(
            "tensor A(3,4) format(dense,compressed)\ntensor B(4,5) format(dense,compressed)\ntensor C(3,5) format(dense,compressed)\nC(i,j) = A(i,k) * B(k,j)",
        )
        .unwrap();
        let g = build_iteration_graph(&k);
        assert_eq!(edges(&g), vec![("i", "j"), ("i", "k"), ("k", "j")]);
        assert_eq!(topo_sort(&g).unwrap(), vec!["i", "k", "j"]);
    }

    #[test]
    fn scale_has_no_edges() {
        let k = parse_kernel("tensor x(8) format(compressed)\nx(i) *= 2").unwrap();
        let g = build_iteration_graph(&k);
        assert!(g.edges.is_empty());
        assert_eq!(topo_sort(&g).unwrap(), vec!["i"]);
    }

    #[test]
    fn column_major_operand() {
        let k = parse_kernel(
            "tensor A(3,4) format(dense,compressed) order(1,0)\ntensor B(4,5)\ntensor C(3,5)\nC(i,j) = A(i,k) * B(k,j)",
        )
        .unwrap();
        let g = build_iteration_graph(&k);
        assert_eq!(edges(&g), vec![("k", "i")]);
        assert_eq!(topo_sort(&g).unwrap(), vec!["j", "k", "i"]);
    }

    #[test]
    fn conflicting_orders() {
        let k = parse_kernel(
            "tensor A(3,4) format(compressed,compressed) order(1,0)\ntensor C(3,4) format(compressed,compressed)\nC(i,j) = A(i,j)",
        )
        .unwrap();
        let err = topo_sort(&build_iteration_graph(&k)).unwrap_err();
        assert_eq!(
            err,
            Error::OrderConflict(vec!["i".into(), "j".into(), "i".into()])
        );
        assert!(err.to_string().contains("i -> j -> i"));
    }

    #[test]
    fn dense_kernel_prints_no_edges() {
        let k = parse_kernel("tensor A(3,4)\ntensor C(3,4)\nC(i,j) = A(i,j)").unwrap();
        assert_eq!(
            build_iteration_graph(&k).to_string(),
            "vars: i j\nedges: none\n"
        );
    }
}
