//! Graph formats, metrics and reachability queries.

use std::collections::{BTreeMap, BTreeSet};

use flowcg::driver::graph::{CallGraph, Format};
use flowcg::driver::metrics::score;
use flowcg::driver::reach::{prune_reachable, vuln_chains, Verdict};
use proptest::prelude::*;

fn graph(edges: &[(&str, &str)]) -> CallGraph {
    let mut g = CallGraph::new();
    for (a, b) in edges {
        g.add_edge(a, b, None);
    }
    g
}

fn arb_graph() -> impl Strategy<Value = CallGraph> {
    let node = (0..6u8).prop_map(|i| format!("m.f{i}"));
    (prop::collection::vec((node.clone(), node.clone()), 0..15), prop::collection::vec(node, 0..3)).prop_map(
        |(edges, lone)| {
            let mut g = CallGraph::new();
            for n in lone {
                g.add_node(&n);
            }
            for (a, b) in edges {
                g.add_edge(&a, &b, Some("m:1:0".into()));
            }
            g
        },
    )
}

#[test]
fn adjacency_format_lists_every_node() {
    let mut g = graph(&[("a", "b")]);
    g.add_node("c");
    assert_eq!(g.emit(Format::Adjacency), "{\"a\": [\"b\"], \"b\": [], \"c\": []}\n");
    assert_eq!(CallGraph::new().emit(Format::Adjacency), "{}\n");
}

#[test]
fn parse_rejects_garbage() {
    assert!(CallGraph::parse("[1, 2").is_err());
    assert!(CallGraph::parse("{\"a\": 3}").is_err());
}

#[test]
fn metrics_hand_computed() {
    let gen = graph(&[("a", "b"), ("a", "c"), ("b", "d")]);
    let gt = graph(&[("a", "b"), ("b", "d"), ("c", "d"), ("d", "e")]);
    let m = score(&gen, &gt);
    assert_eq!(m.tp.len(), 2);
    assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
    assert!((m.recall - 0.5).abs() < 1e-12);
    assert_eq!(m.fp, BTreeSet::from([("a".to_string(), "c".to_string())]));
}

#[test]
fn metrics_empty_is_one() {
    let m = score(&CallGraph::new(), &CallGraph::new());
    assert_eq!((m.precision, m.recall), (1.0, 1.0));
    let m = score(&CallGraph::new(), &graph(&[("a", "b")]));
    assert_eq!((m.precision, m.recall), (1.0, 0.0));
    let m = score(&graph(&[("a", "b")]), &CallGraph::new());
    assert_eq!((m.precision, m.recall), (0.0, 1.0));
}

#[test]
fn reach_reports_shortest_chain_and_safe() {
    let g = graph(&[("main", "x"), ("x", "y"), ("y", "bad"), ("main", "y"), ("dead", "worse")]);
    let v = vuln_chains(&g, &["main".into()], &["bad".into(), "worse".into(), "missing".into()]);
    assert_eq!(v[0].1, Verdict::Reachable(vec!["main".into(), "y".into(), "bad".into()]));
    assert_eq!(v[1].1, Verdict::Safe);
    assert_eq!(v[2].1, Verdict::Unknown);
}

/// All simple paths from `from` to `to`, by plain DFS.
fn simple_paths(g: &CallGraph, from: &str, to: &str) -> Vec<Vec<String>> {
    fn go(s: &BTreeMap<&str, Vec<&str>>, n: &str, to: &str, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        path.push(n.to_string());
        if n == to {
            out.push(path.clone());
        } else {
            for m in s.get(n).into_iter().flatten() {
                if !path.iter().any(|p| p == m) {
                    go(s, m, to, path, out);
                }
            }
        }
        path.pop();
    }
    let s = g.successors();
    let mut out = Vec::new();
    go(&s, from, to, &mut Vec::new(), &mut out);
    out
}

proptest! {
    #[test]
    fn emit_parse_round_trips(g in arb_graph()) {
        for f in [Format::Adjacency, Format::Edges] {
            let back = CallGraph::parse(&g.emit(f)).unwrap();
            prop_assert_eq!(back.nodes(), g.nodes());
            prop_assert_eq!(back.edge_set(), g.edge_set());
        }
    }

    #[test]
    fn metrics_bounds(a in arb_graph(), b in arb_graph()) {
        let m = score(&a, &b);
        prop_assert!((0.0..=1.0).contains(&m.precision) && (0.0..=1.0).contains(&m.recall));
        prop_assert_eq!(m.tp.len() + m.fp.len(), a.edge_set().len());
        prop_assert_eq!(m.tp.len() + m.fn_.len(), b.edge_set().len());
        prop_assert_eq!(score(&a, &a).precision, 1.0);
    }

    #[test]
    fn chains_agree_with_path_enumeration(g in arb_graph(), t in 0..6u8) {
        let target = format!("m.f{t}");
        let entry = "m.f0".to_string();
        let v = vuln_chains(&g, std::slice::from_ref(&entry), std::slice::from_ref(&target));
        let paths = if g.contains(&entry) { simple_paths(&g, &entry, &target) } else { Vec::new() };
        match &v[0].1 {
            Verdict::Unknown => prop_assert!(!g.contains(&target)),
            Verdict::Safe => prop_assert!(paths.is_empty()),
            Verdict::Reachable(chain) => {
                let shortest = paths.iter().map(Vec::len).min().unwrap();
                prop_assert_eq!(chain.len(), shortest);
                prop_assert!(paths.contains(chain));
            }
        }
    }

    #[test]
    fn pruned_graph_is_reachable_subgraph(g in arb_graph()) {
        let p = prune_reachable(&g, &["m.f0".into()]);
        prop_assert!(p.edge_set().is_subset(&g.edge_set()));
        for n in p.nodes() {
            prop_assert!(n == "m.f0" || !simple_paths(&g, "m.f0", n).is_empty());
        }
    }
}
