//! Reachability pruning and vulnerable-function call chains.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::warn;

use super::graph::CallGraph;

/// Subgraph forward-reachable from `entries`. Entries missing from the
/// graph stay as isolated nodes.
pub fn prune_reachable(cg: &CallGraph, entries: &[String]) -> CallGraph {
    let succ = cg.successors();
    let mut out = CallGraph::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut todo: Vec<&str> = Vec::new();
    for e in entries {
        if !cg.contains(e) {
            warn!("entry `{e}` is not in the call graph");
        }
        out.add_node(e);
        if seen.insert(e) {
            todo.push(e);
        }
    }
    while let Some(n) = todo.pop() {
        for &m in succ.get(n).into_iter().flatten() {
            out.add_edge(n, m, None);
            if seen.insert(m) {
                todo.push(m);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Shortest chain from some entry to the target, both ends included.
    Reachable(Vec<String>),
    Safe,
    /// The target names no node at all.
    Unknown,
}

/// One verdict per target, in the order given. Chains come from a
/// breadth-first search seeded with all entries, so ties break by entry
/// order and then by sorted successor order.
pub fn vuln_chains(cg: &CallGraph, entries: &[String], targets: &[String]) -> Vec<(String, Verdict)> {
    let succ = cg.successors();
    let mut parent: BTreeMap<&str, Option<&str>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for e in entries {
        if cg.contains(e) && !parent.contains_key(e.as_str()) {
            parent.insert(e, None);
            queue.push_back(e.as_str());
        }
    }
    while let Some(n) = queue.pop_front() {
        for &m in succ.get(n).into_iter().flatten() {
            if !parent.contains_key(m) {
                parent.insert(m, Some(n));
                queue.push_back(m);
            }
        }
    }
    targets
        .iter()
        .map(|t| {
            let verdict = if !cg.contains(t) {
                Verdict::Unknown
            } else if parent.contains_key(t.as_str()) {
                let mut chain = vec![t.clone()];
                let mut cur = t.as_str();
                while let Some(Some(p)) = parent.get(cur) {
                    chain.push(p.to_string());
                    cur = p;
                }
                chain.reverse();
                Verdict::Reachable(chain)
            } else {
                Verdict::Safe
            };
            (t.clone(), verdict)
        })
        .collect()
}
