//! Scenario orchestration: building the program, picking entries, running
//! one session per entry and collecting the union graph.

pub mod graph;
pub mod metrics;
pub mod reach;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use log::warn;

use crate::error::{ConfigError, ModuleError};
use crate::facts::ident::{Ident, Kind};
use crate::facts::Program;
use crate::inter::{entry_graph, CallEdge, Limits, Session, Stats};
use crate::source::discover_modules;
use crate::transfer::builtins::BuiltinTable;
pub use graph::{CallGraph, Format};
pub use metrics::{score, MetricsReport};
pub use reach::{prune_reachable, vuln_chains, Verdict};

/// Exhaustive or application-centered, over the application alone or the
/// whole program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    EA,
    EW,
    AA,
    AW,
}

impl Mode {
    pub fn whole_program(self) -> bool {
        matches!(self, Mode::EW | Mode::AW)
    }

    pub fn exhaustive(self) -> bool {
        matches!(self, Mode::EA | Mode::EW)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ea" => Ok(Mode::EA),
            "ew" => Ok(Mode::EW),
            "aa" => Ok(Mode::AA),
            "aw" => Ok(Mode::AW),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Sessions run on the rayon pool. Same as `Sequential` when the
    /// `parallel` feature is off.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub app_root: PathBuf,
    pub lib_roots: Vec<PathBuf>,
    /// Dotted names; empty means discover.
    pub entries: Vec<String>,
    pub builtins: Option<PathBuf>,
    pub schedule: Schedule,
    pub limits: Limits,
}

impl ScenarioConfig {
    pub fn new(mode: Mode, app_root: impl Into<PathBuf>) -> Self {
        ScenarioConfig {
            mode,
            app_root: app_root.into(),
            lib_roots: Vec::new(),
            entries: Vec::new(),
            builtins: None,
            schedule: Schedule::default(),
            limits: Limits::default(),
        }
    }
}

#[derive(Debug)]
pub struct ScenarioResult {
    pub graph: CallGraph,
    pub entries: Vec<String>,
    pub stats: Stats,
    pub diagnostics: Vec<String>,
    pub errors: Vec<ModuleError>,
}

pub fn load_program(cfg: &ScenarioConfig) -> Result<Program, ConfigError> {
    let table = discover_modules(&cfg.app_root, &cfg.lib_roots)?;
    let builtins = match &cfg.builtins {
        Some(p) => BuiltinTable::load(p)?,
        None => BuiltinTable::standard(),
    };
    Ok(Program::new(table, cfg.mode.whole_program(), Arc::new(builtins)))
}

/// Entry functions for `mode`. Explicit names must all resolve.
pub fn discover_entries(program: &Program, mode: Mode, explicit: &[String]) -> Result<Vec<Ident>, ConfigError> {
    if !explicit.is_empty() {
        return explicit
            .iter()
            .map(|q| program.find_function(q).ok_or_else(|| ConfigError::UnknownEntry(q.clone())))
            .collect();
    }
    if mode.exhaustive() {
        return Ok(program.functions_where(|m| mode.whole_program() || !m.is_library));
    }
    let app: Vec<String> =
        program.modules().filter(|m| !m.is_library).map(|m| m.qualified_name.clone()).collect();
    let guarded: Vec<&String> =
        app.iter().filter(|m| program.facts(m).is_some_and(|f| f.has_main_guard)).collect();
    // Without any `__main__` guard every application module counts as a
    // script.
    let bodies: Vec<&String> = if guarded.is_empty() { app.iter().collect() } else { guarded };
    let mut out: Vec<Ident> = bodies.into_iter().map(|m| Ident::module_body(m)).collect();
    for m in &app {
        if let Some(f) = program.facts(m) {
            out.extend(f.functions.keys().filter(|i| i.namespace().len() == 1 && i.kind() == Kind::Func).cloned());
        }
    }
    out.retain(|i| program.function(i).is_some());
    Ok(out)
}

struct SessionResult {
    edges: BTreeSet<CallEdge>,
    stats: Stats,
    diagnostics: Vec<String>,
}

/// One session per group: entries of the same module share a cache, since
/// they tend to call into the same libraries. Grouping depends only on the
/// entry list, so every schedule sees the same sessions.
fn group_entries(entries: &[Ident]) -> Vec<Vec<&Ident>> {
    let mut groups: BTreeMap<&str, Vec<&Ident>> = BTreeMap::new();
    for e in entries {
        groups.entry(e.module_name()).or_default().push(e);
    }
    groups.into_values().collect()
}

fn run_group(program: &Program, group: &[&Ident], limits: Limits) -> SessionResult {
    let mut sess = Session::new(program, limits);
    for entry in group {
        if let Some(def) = program.function(entry) {
            let g_in = entry_graph(program, &def);
            sess.analyze(&def, g_in);
        }
    }
    let stats = sess.stats;
    let diagnostics = std::mem::take(&mut sess.diagnostics);
    SessionResult { edges: sess.into_edges(), stats, diagnostics }
}

#[cfg(feature = "parallel")]
fn run_all(program: &Program, entries: &[Ident], limits: Limits, schedule: Schedule) -> Vec<SessionResult> {
    use rayon::prelude::*;
    let groups = group_entries(entries);
    match schedule {
        Schedule::Parallel => groups.par_iter().map(|g| run_group(program, g, limits)).collect(),
        Schedule::Sequential => groups.iter().map(|g| run_group(program, g, limits)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(program: &Program, entries: &[Ident], limits: Limits, _schedule: Schedule) -> Vec<SessionResult> {
    group_entries(entries).iter().map(|g| run_group(program, g, limits)).collect()
}

/// Runs every entry's session over an already loaded program.
pub fn analyze_program(
    program: &Program,
    entries: &[Ident],
    limits: Limits,
    schedule: Schedule,
) -> (CallGraph, Stats, Vec<String>) {
    let results = run_all(program, entries, limits, schedule);
    let mut graph = CallGraph::new();
    let mut stats = Stats::default();
    let mut diagnostics = BTreeSet::new();
    for e in entries {
        graph.add_node(&e.dotted());
    }
    for r in results {
        stats += r.stats;
        diagnostics.extend(r.diagnostics);
        for edge in r.edges {
            graph.add_edge(&edge.caller.dotted(), &edge.callee.dotted(), Some(edge.site.to_string()));
        }
    }
    (graph, stats, diagnostics.into_iter().collect())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, ConfigError> {
    let program = load_program(cfg)?;
    let entries = discover_entries(&program, cfg.mode, &cfg.entries)?;
    if entries.is_empty() {
        warn!("no entry functions found");
    }
    let (graph, stats, mut diagnostics) = analyze_program(&program, &entries, cfg.limits, cfg.schedule);
    diagnostics.extend(program.warnings.iter().cloned());
    Ok(ScenarioResult {
        graph,
        entries: entries.iter().map(Ident::dotted).collect(),
        stats,
        diagnostics,
        errors: program.errors(),
    })
}
