//! Precision and recall over edge sets.

use std::collections::BTreeSet;

use super::graph::CallGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub tp: BTreeSet<(String, String)>,
    pub fp: BTreeSet<(String, String)>,
    pub fn_: BTreeSet<(String, String)>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// precision = |TP|/|Gen|, recall = |TP|/|GT|, with 0/0 taken as 1.
pub fn score(gen: &CallGraph, gt: &CallGraph) -> MetricsReport {
    let g = gen.edge_set();
    let t = gt.edge_set();
    let tp: BTreeSet<_> = g.intersection(&t).cloned().collect();
    let fp: BTreeSet<_> = g.difference(&t).cloned().collect();
    let fn_: BTreeSet<_> = t.difference(&g).cloned().collect();
    MetricsReport { precision: ratio(tp.len(), g.len()), recall: ratio(tp.len(), t.len()), tp, fp, fn_ }
}
