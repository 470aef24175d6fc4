//! Named call graphs: emission and parsing of the two JSON formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Adjacency,
    Edges,
}

/// Call graph over dotted names. Edge sites are kept when known; an edge
/// parsed from adjacency JSON has none.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), BTreeSet<String>>,
}

impl CallGraph {
    pub fn new() -> Self {
        CallGraph::default()
    }

    pub fn add_node(&mut self, n: &str) {
        self.nodes.insert(n.to_string());
    }

    pub fn add_edge(&mut self, caller: &str, callee: &str, site: Option<String>) {
        self.add_node(caller);
        self.add_node(callee);
        let sites = self.edges.entry((caller.to_string(), callee.to_string())).or_default();
        sites.extend(site);
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn contains(&self, n: &str) -> bool {
        self.nodes.contains(n)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.keys().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges.keys().cloned().collect()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains_key(&(a.to_string(), b.to_string()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = self.nodes.iter().map(|n| (n.as_str(), Vec::new())).collect();
        for (a, b) in self.edges() {
            out.entry(a).or_default().push(b);
        }
        out
    }

    pub fn merge(&mut self, other: &CallGraph) {
        self.nodes.extend(other.nodes.iter().cloned());
        for (k, sites) in &other.edges {
            self.edges.entry(k.clone()).or_default().extend(sites.iter().cloned());
        }
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Adjacency => self.emit_adjacency(),
            Format::Edges => self.emit_edges(),
        }
    }

    /// `{"a": ["b"], "b": []}` with sorted keys and arrays.
    fn emit_adjacency(&self) -> String {
        let mut out = String::from("{");
        for (i, (node, succ)) in self.successors().into_iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}: [", quote(node));
            let list: Vec<String> = succ.iter().map(|s| quote(s)).collect();
            out.push_str(&list.join(", "));
            out.push(']');
        }
        out.push_str("}\n");
        out
    }

    fn emit_edges(&self) -> String {
        let mut rows = Vec::new();
        for ((a, b), sites) in &self.edges {
            if sites.is_empty() {
                rows.push(format!("  {{\"caller\": {}, \"callee\": {}, \"site\": null}}", quote(a), quote(b)));
            }
            for s in sites {
                rows.push(format!(
                    "  {{\"caller\": {}, \"callee\": {}, \"site\": {}}}",
                    quote(a),
                    quote(b),
                    quote(s)
                ));
            }
        }
        let isolated: Vec<&String> =
            self.nodes.iter().filter(|n| !self.edges.keys().any(|(a, b)| a == *n || b == *n)).collect();
        for n in isolated {
            rows.push(format!("  {{\"node\": {}}}", quote(n)));
        }
        if rows.is_empty() {
            return "[]\n".to_string();
        }
        format!("[\n{}\n]\n", rows.join(",\n"))
    }

    /// Reads either format.
    pub fn parse(text: &str) -> Result<CallGraph, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut g = CallGraph::new();
        match v {
            Value::Object(map) => {
                for (k, succ) in map {
                    g.add_node(&k);
                    let Value::Array(items) = succ else { return Err(format!("value of `{k}` is not a list")) };
                    for item in items {
                        let Value::String(s) = item else { return Err(format!("non-string callee under `{k}`")) };
                        g.add_edge(&k, &s, None);
                    }
                }
            }
            Value::Array(rows) => {
                for row in rows {
                    let field = |name: &str| row.get(name).and_then(Value::as_str).map(str::to_string);
                    if let Some(n) = field("node") {
                        g.add_node(&n);
                        continue;
                    }
                    match (field("caller"), field("callee")) {
                        (Some(a), Some(b)) => g.add_edge(&a, &b, field("site")),
                        _ => return Err("edge row without caller/callee".into()),
                    }
                }
            }
            _ => return Err("expected an object or an array".into()),
        }
        Ok(g)
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}
