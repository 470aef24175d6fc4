//! Function type graphs: flow-labelled relations `src -> dst @ site`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::facts::ident::{Ident, Kind};
use crate::source::cfg::Cfg;
use crate::source::site::ExprSite;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub src: Ident,
    pub dst: Ident,
    pub site: ExprSite,
}

impl Relation {
    pub fn new(src: Ident, dst: Ident, site: ExprSite) -> Self {
        Relation { src, dst, site }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} @ {}", self.src, self.dst, self.site)
    }
}

pub type Targets = BTreeSet<(Ident, ExprSite)>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ftg {
    rels: BTreeMap<Ident, Targets>,
}

/// Smallest identifier that can be a field path of `root`.
fn field_floor(root: &Ident) -> Ident {
    Ident::new(Kind::Mod, root.path(), "")
}

impl Ftg {
    pub fn new() -> Self {
        Ftg::default()
    }

    pub fn from_relations(rels: impl IntoIterator<Item = Relation>) -> Self {
        let mut g = Ftg::new();
        for r in rels {
            g.insert(r);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.rels.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    pub fn get(&self, src: &Ident) -> Option<&Targets> {
        self.rels.get(src)
    }

    pub fn srcs(&self) -> impl Iterator<Item = &Ident> {
        self.rels.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Ident, &Targets)> {
        self.rels.iter()
    }

    pub fn relations(&self) -> impl Iterator<Item = Relation> + '_ {
        self.rels
            .iter()
            .flat_map(|(s, ts)| ts.iter().map(move |(d, e)| Relation::new(s.clone(), d.clone(), e.clone())))
    }

    pub fn relations_dsts(&self) -> impl Iterator<Item = &Ident> {
        self.rels.values().flat_map(|ts| ts.iter().map(|(d, _)| d))
    }

    /// Weak insertion.
    pub fn insert(&mut self, r: Relation) {
        self.rels.entry(r.src).or_default().insert((r.dst, r.site));
    }

    /// Field paths stored under `root`, e.g. `x.f` and `x.f.g` for `x`.
    pub fn fields_of<'a>(&'a self, root: &'a Ident) -> impl Iterator<Item = (&'a Ident, &'a Targets)> + 'a {
        self.rels.range(field_floor(root)..).take_while(move |(k, _)| k.is_field_of(root))
    }

    /// Drops every relation of `src` and of its field paths.
    pub fn kill(&mut self, src: &Ident) {
        self.rels.remove(src);
        let doomed: Vec<Ident> = self.fields_of(src).map(|(k, _)| k.clone()).collect();
        for k in doomed {
            self.rels.remove(&k);
        }
    }

    /// For each source in `delta`, replaces its relations (and those of its
    /// field paths) with the ones in `delta`.
    pub fn strong_update(&mut self, delta: impl IntoIterator<Item = Relation>) {
        let mut grouped: BTreeMap<Ident, Targets> = BTreeMap::new();
        for r in delta {
            grouped.entry(r.src).or_default().insert((r.dst, r.site));
        }
        for (src, targets) in grouped {
            self.kill(&src);
            self.rels.insert(src, targets);
        }
    }

    /// Replaces the relations of `src` with `targets`, all at `site`. An
    /// empty set leaves `src` unbound.
    pub fn bind(&mut self, src: &Ident, targets: impl IntoIterator<Item = Ident>, site: &ExprSite) {
        self.kill(src);
        let set: Targets = targets.into_iter().map(|t| (t, site.clone())).collect();
        if !set.is_empty() {
            self.rels.insert(src.clone(), set);
        }
    }

    pub fn weak_update(&mut self, delta: impl IntoIterator<Item = Relation>) {
        for r in delta {
            self.insert(r);
        }
    }

    pub fn merge_from(&mut self, other: &Ftg) {
        for (src, ts) in &other.rels {
            match self.rels.get_mut(src) {
                Some(mine) => mine.extend(ts.iter().cloned()),
                None => {
                    self.rels.insert(src.clone(), ts.clone());
                }
            }
        }
    }

    /// Union of a non-empty set of graphs.
    pub fn merge<'a>(gs: impl IntoIterator<Item = &'a Ftg>) -> Ftg {
        let mut it = gs.into_iter();
        let mut out = it.next().expect("merge of no graphs").clone();
        for g in it {
            out.merge_from(g);
        }
        out
    }

    pub fn points_of(&self, t: &Ident) -> BTreeSet<Ident> {
        self.points_of_with(t, &|_| None)
    }

    /// Non-var pointees reachable from `t`. Variables with no relation in
    /// the graph are looked up in `fallback`.
    pub fn points_of_with(&self, t: &Ident, fallback: &dyn Fn(&Ident) -> Option<BTreeSet<Ident>>) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![t.clone()];
        while let Some(v) = stack.pop() {
            if !v.kind().is_var() {
                out.insert(v);
                continue;
            }
            if !seen.insert(v.clone()) {
                continue;
            }
            match self.rels.get(&v) {
                Some(ts) => stack.extend(ts.iter().map(|(d, _)| d.clone())),
                None => stack.extend(fallback(&v).into_iter().flatten()),
            }
        }
        out
    }

    /// Canonical form with ordinals erased: `(src, dst, module, line, col)`.
    pub fn canonical(&self) -> BTreeSet<(Ident, Ident, String, u32, u32)> {
        self.relations()
            .map(|r| {
                let (m, l, c) = r.site.location();
                (r.src, r.dst, m.to_string(), l, c)
            })
            .collect()
    }

    pub fn equals(&self, other: &Ftg) -> bool {
        self.canonical() == other.canonical()
    }

    /// Relations without sites; the reuse-cache key for graphs whose sites
    /// are all the callee's entry.
    pub fn key(&self) -> Vec<(Ident, Ident)> {
        let set: BTreeSet<(Ident, Ident)> = self.relations().map(|r| (r.src, r.dst)).collect();
        set.into_iter().collect()
    }

    /// One relation per line, sorted.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self.relations().map(|r| r.to_string()).collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Flow order between two sites of `cfg`. Sites outside the graph come
/// before every site inside it.
fn precedes(a: &ExprSite, b: &ExprSite, cfg: &Cfg) -> bool {
    match (cfg.node_of(a), cfg.node_of(b)) {
        (Some(x), Some(y)) => x != y && cfg.reaches(x, y),
        (None, Some(_)) => true,
        _ => false,
    }
}

/// Drops relations superseded along the flow order: `r1` goes when its site
/// reaches `r2`'s site but not the other way round.
pub fn latest(targets: &Targets, cfg: &Cfg) -> Targets {
    if targets.len() < 2 {
        return targets.clone();
    }
    targets
        .iter()
        .filter(|(_, s1)| {
            !targets.iter().any(|(_, s2)| s1 != s2 && precedes(s1, s2, cfg) && !precedes(s2, s1, cfg))
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn m() -> Ident {
        Ident::module("m")
    }
    fn var(n: &str) -> Ident {
        m().child(Kind::Var, n)
    }
    fn cls(n: &str) -> Ident {
        m().child(Kind::Cls, n)
    }
    fn site(line: u32) -> ExprSite {
        let name: Arc<str> = "m".into();
        ExprSite::new(&name, line, 0, line)
    }

    #[test]
    fn reassignment_replaces() {
        let mut g = Ftg::from_relations([Relation::new(var("x"), cls("A"), site(1))]);
        g.strong_update([Relation::new(var("x"), cls("B"), site(2))]);
        assert_eq!(g.dump(), "m.x -> m.B @ m:2:0\n");
    }

    #[test]
    fn strong_update_drops_field_paths_of_the_old_binding() {
        let mut g = Ftg::from_relations([
            Relation::new(var("x"), cls("A"), site(1)),
            Relation::new(var("x").field("f"), cls("T"), site(2)),
            Relation::new(var("y"), cls("T"), site(2)),
        ]);
        g.strong_update([Relation::new(var("x"), cls("B"), site(3))]);
        assert_eq!(g.dump(), "m.x -> m.B @ m:3:0\nm.y -> m.T @ m:2:0\n");
    }

    #[test]
    fn class_attribute_binding() {
        let base = cls("Base");
        let mut g = Ftg::new();
        g.strong_update([Relation::new(base.field("collector"), cls("Cpu"), site(10))]);
        assert_eq!(g.points_of(&base.field("collector")), BTreeSet::from([cls("Cpu")]));
    }

    #[test]
    fn copies_are_independent() {
        let g = Ftg::from_relations([Relation::new(var("x"), cls("A"), site(1))]);
        let mut h = g.clone();
        h.strong_update([Relation::new(var("x"), cls("B"), site(2))]);
        assert_eq!(g.points_of(&var("x")), BTreeSet::from([cls("A")]));
        assert!(Ftg::new().clone().is_empty());
    }

    #[test]
    fn merge_keeps_both_sites() {
        let a = Ftg::from_relations([Relation::new(var("x"), cls("A"), site(2))]);
        let b = Ftg::from_relations([Relation::new(var("x"), cls("B"), site(4))]);
        let g = Ftg::merge([&a, &b]);
        assert_eq!(g.len(), 2);
        assert_eq!(Ftg::merge([&a]), a);
    }

    #[test]
    #[should_panic]
    fn merge_of_nothing_is_a_contract_violation() {
        Ftg::merge(std::iter::empty::<&Ftg>());
    }

    #[test]
    fn points_of_follows_chains_and_stops_on_cycles() {
        let g = Ftg::from_relations([
            Relation::new(var("y"), var("x"), site(1)),
            Relation::new(var("x"), cls("K"), site(0)),
        ]);
        assert_eq!(g.points_of(&var("y")), BTreeSet::from([cls("K")]));
        let c = Ftg::from_relations([
            Relation::new(var("a"), var("b"), site(1)),
            Relation::new(var("b"), var("a"), site(2)),
        ]);
        assert!(c.points_of(&var("a")).is_empty());
    }

    #[test]
    fn equality_ignores_ordinals_and_order() {
        let name: Arc<str> = "m".into();
        let a = Ftg::from_relations([
            Relation::new(var("x"), cls("A"), ExprSite::new(&name, 1, 0, 0)),
            Relation::new(var("y"), cls("B"), site(2)),
        ]);
        let b = Ftg::from_relations([
            Relation::new(var("y"), cls("B"), site(2)),
            Relation::new(var("x"), cls("A"), ExprSite::new(&name, 1, 0, 7)),
        ]);
        assert!(a.equals(&b));
        let mut c = b.clone();
        c.insert(Relation::new(var("z"), cls("C"), site(3)));
        assert!(!a.equals(&c));
    }
}
