#![allow(dead_code)]

use dagbound::{Dag, VertexId, Work};
use proptest::prelude::*;

/// Random DAG with up to `max_n` vertices. Edges respect a hidden random
/// order, so vertex ids are not always topologically sorted.
pub fn small_dag(max_n: usize, max_wcet: Work) -> impl Strategy<Value = Dag> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                proptest::collection::vec(0..=max_wcet, n),
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(wcets, mask, perm)| {
            let n = wcets.len();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if mask[bit] {
                        edges.push((perm[i], perm[j]));
                    }
                    bit += 1;
                }
            }
            Dag::new(wcets, &edges).unwrap()
        })
}

/// Every maximal path (source to sink) by depth-first enumeration.
pub fn all_complete_paths(dag: &Dag) -> Vec<Vec<VertexId>> {
    fn walk(dag: &Dag, v: VertexId, prefix: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        prefix.push(v);
        if dag.successors(v).is_empty() {
            out.push(prefix.clone());
        } else {
            for &w in dag.successors(v) {
                walk(dag, w, prefix, out);
            }
        }
        prefix.pop();
    }
    let mut out = Vec::new();
    for s in dag.sources() {
        walk(dag, s, &mut Vec::new(), &mut out);
    }
    out
}

/// Longest path length under `weights` by brute force.
pub fn brute_longest(dag: &Dag, weights: &[Work]) -> Work {
    all_complete_paths(dag)
        .iter()
        .map(|p| p.iter().map(|v| weights[v.index()]).sum())
        .max()
        .unwrap_or(0)
}
