//! Small dense linear algebra over any [`Scalar`], exact types included.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n` and is consumed.
pub fn solve_dense<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot * n + col].is_zero() {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let diag = a[col * n + col].clone();
        for row in col + 1..n {
            let factor = a[row * n + col].clone() / diag.clone();
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k].clone() * factor.clone();
                a[row * n + k] = a[row * n + k].clone() - v;
            }
            let v = b[col].clone() * factor;
            b[row] = b[row].clone() - v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row * n + k].clone() * x[k].clone();
        }
        x[row] = acc / a[row * n + row].clone();
    }
    Ok(x)
}

/// Closed communicating classes of the directed graph with the given edges
/// (`from -> to`), each sorted, in ascending order of their smallest member.
pub fn closed_classes(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (from, to) in edges {
        if from != to {
            graph.add_edge(nodes[from], nodes[to], ());
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for node in members {
            component[node.index()] = c;
        }
    }
    let mut closed: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members.iter().all(|node| {
                graph
                    .neighbors(*node)
                    .all(|next| component[next.index()] == *c)
            })
        })
        .map(|(_, members)| {
            let mut v: Vec<usize> = members.iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    closed.sort();
    closed
}
