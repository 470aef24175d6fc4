//! Inter-procedural analysis: the per-entry session that analyses callees
//! on demand, reuses results for equal input graphs, and guards recursion.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use log::debug;
use rustpython_parser::ast::Expr;

use crate::facts::ident::Ident;
use crate::facts::summary::FunctionDef;
use crate::facts::Program;
use crate::ftg::Ftg;
use crate::intra;
use crate::source::site::ExprSite;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallEdge {
    pub caller: Ident,
    pub callee: Ident,
    pub site: ExprSite,
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Deepest call stack a session will build.
    pub max_depth: usize,
    /// How many frames of one function (with different input graphs) may
    /// be live at once.
    pub max_same_function: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_depth: 48, max_same_function: 2 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub rule_applications: u64,
    pub cache_hits: u64,
    pub analyses: u64,
    pub recursion_cuts: u64,
    pub unresolved_calls: u64,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Stats) {
        self.rule_applications += o.rule_applications;
        self.cache_hits += o.cache_hits;
        self.analyses += o.analyses;
        self.recursion_cuts += o.recursion_cuts;
        self.unresolved_calls += o.unresolved_calls;
    }
}

#[derive(Debug)]
pub enum Event {
    Edge(CallEdge),
    Child(Arc<Outcome>),
}

/// One finished analysis of a function under one input graph.
#[derive(Debug)]
pub struct Outcome {
    pub ftg_in: Ftg,
    pub ftg_out: Ftg,
    pub ret: BTreeSet<Ident>,
    /// Edges recorded while walking this function and the outcomes of the
    /// calls it made, in order; replayed on a cache hit.
    pub events: Vec<Event>,
}

struct Frame {
    func: Ident,
    key: Vec<(Ident, Ident)>,
    events: Vec<Event>,
    /// Lowest stack index a recursion cut below this frame pointed at.
    min_cut: usize,
}

type CacheKey = (Ident, Vec<(Ident, Ident)>);

/// One analysis session: strictly sequential, one per entry function.
///
/// Results are cached per session keyed by `(function, g_in)`. A result is
/// only cached when no recursion cut inside it reached a frame below it,
/// since such a result depends on the stack it was computed under. Caches
/// are not shared between sessions, so a session's output never depends on
/// how other sessions were scheduled.
pub struct Session<'p> {
    program: &'p Program,
    limits: Limits,
    cache: HashMap<CacheKey, Arc<Outcome>>,
    stack: Vec<Frame>,
    edges: BTreeSet<CallEdge>,
    replayed: HashSet<*const Outcome>,
    pub stats: Stats,
    pub diagnostics: Vec<String>,
}

impl<'p> Session<'p> {
    pub fn new(program: &'p Program, limits: Limits) -> Self {
        Session {
            program,
            limits,
            cache: HashMap::new(),
            stack: Vec::new(),
            edges: BTreeSet::new(),
            replayed: HashSet::new(),
            stats: Stats::default(),
            diagnostics: Vec::new(),
        }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn edges(&self) -> &BTreeSet<CallEdge> {
        &self.edges
    }

    pub fn into_edges(self) -> BTreeSet<CallEdge> {
        self.edges
    }

    pub fn record_edge(&mut self, caller: &Ident, callee: &Ident, site: &ExprSite) {
        let edge = CallEdge { caller: caller.clone(), callee: callee.clone(), site: site.clone() };
        if let Some(top) = self.stack.last_mut() {
            top.events.push(Event::Edge(edge.clone()));
        }
        self.edges.insert(edge);
    }

    pub fn unresolved(&mut self, site: &ExprSite, _func: &Expr) {
        self.stats.unresolved_calls += 1;
        debug!("unresolved call at {site}");
    }

    /// Analyses `def` under `g_in`, or returns `None` when the call is cut
    /// for recursion. The caller has already recorded the edge.
    pub fn analyze(&mut self, def: &FunctionDef, g_in: Ftg) -> Option<Arc<Outcome>> {
        let key = g_in.key();
        if let Some(i) = self.stack.iter().position(|f| f.func == def.ident && f.key == key) {
            return self.cut(i);
        }
        let cache_key = (def.ident.clone(), key);
        if let Some(hit) = self.cache.get(&cache_key).cloned() {
            self.stats.cache_hits += 1;
            self.replay(&hit);
            if let Some(top) = self.stack.last_mut() {
                top.events.push(Event::Child(hit.clone()));
            }
            return Some(hit);
        }
        let same: Vec<usize> =
            self.stack.iter().enumerate().filter(|(_, f)| f.func == def.ident).map(|(i, _)| i).collect();
        if same.len() >= self.limits.max_same_function {
            return self.cut(same[0]);
        }
        if self.stack.len() >= self.limits.max_depth {
            // Depends on depth alone, not on any frame's contents: the
            // caller stays cacheable.
            self.stats.recursion_cuts += 1;
            return None;
        }

        self.stats.analyses += 1;
        let idx = self.stack.len();
        let (func, key) = cache_key;
        self.stack.push(Frame { func, key, events: Vec::new(), min_cut: usize::MAX });
        let ftg_r = intra::walk(self, def, &g_in);
        let frame = self.stack.pop().expect("frame pushed above");
        let ftg_out = intra::compute_output_ftg(def, &ftg_r);
        let ret = ftg_r.points_of(&def.ident.ret());
        let outcome = Arc::new(Outcome { ftg_in: g_in, ftg_out, ret, events: frame.events });
        if frame.min_cut >= idx {
            self.cache.insert((frame.func, frame.key), outcome.clone());
        }
        if let Some(top) = self.stack.last_mut() {
            top.min_cut = top.min_cut.min(frame.min_cut);
            top.events.push(Event::Child(outcome.clone()));
        }
        Some(outcome)
    }

    fn cut(&mut self, to: usize) -> Option<Arc<Outcome>> {
        self.stats.recursion_cuts += 1;
        if let Some(top) = self.stack.last_mut() {
            top.min_cut = top.min_cut.min(to);
        }
        None
    }

    fn replay(&mut self, root: &Arc<Outcome>) {
        let mut todo = vec![root.clone()];
        while let Some(o) = todo.pop() {
            if !self.replayed.insert(Arc::as_ptr(&o)) {
                continue;
            }
            for e in &o.events {
                match e {
                    Event::Edge(edge) => {
                        self.edges.insert(edge.clone());
                    }
                    Event::Child(c) => todo.push(c.clone()),
                }
            }
        }
    }
}

/// Input graph for analysing `def` as an entry: methods get an instance of
/// their class as receiver, parameters with defaults get the default.
pub fn entry_graph(program: &Program, def: &FunctionDef) -> Ftg {
    use crate::facts::summary::MethodKind;
    let recv = match (&def.method, &def.class) {
        (MethodKind::Instance, Some(c)) => Some(BTreeSet::from([c.instance()])),
        (MethodKind::Class, Some(c)) => Some(BTreeSet::from([c.clone()])),
        _ => None,
    };
    let mut ignored = Vec::new();
    intra::compute_param_types(program, def, recv.as_ref(), &Default::default(), &Ftg::new(), &mut ignored)
}
