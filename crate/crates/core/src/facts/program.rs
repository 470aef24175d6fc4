//! The analysed program: lazily previsited modules, static name resolution,
//! class hierarchy queries and the three summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use log::{debug, warn};
use rustpython_parser::ast;

use crate::error::ModuleError;
use crate::facts::ident::{Ident, Kind};
use crate::facts::mro::{self, MroError};
use crate::facts::previsit::previsit;
use crate::facts::summary::{
    ClassDef, ClassSummary, FunctionDef, FunctionSummary, ImportSummary, ModuleFacts, TopBinding,
};
use crate::source::cfg::ImportTarget;
use crate::source::{parse_module, walk, ModuleTable, SourceModule};
use crate::transfer::builtins::{self, BuiltinTable};

/// Bound on chains of static lookups (`a = b`, re-exports, ...).
const STATIC_DEPTH: u32 = 12;

type Seeds = BTreeMap<Ident, BTreeSet<Ident>>;

struct Slot {
    source: SourceModule,
    facts: OnceLock<Result<Arc<ModuleFacts>, ModuleError>>,
    seeds: OnceLock<Arc<Seeds>>,
}

pub struct Program {
    slots: BTreeMap<String, Slot>,
    whole_program: bool,
    builtins: Arc<BuiltinTable>,
    pub warnings: Vec<String>,
}

impl Program {
    /// `whole_program` decides whether library roots are descended into; in
    /// application scope their modules become external stubs.
    pub fn new(table: ModuleTable, whole_program: bool, builtins: Arc<BuiltinTable>) -> Self {
        let warnings = table.warnings.clone();
        let slots = table
            .iter()
            .filter(|m| whole_program || !m.is_library)
            .map(|m| {
                let slot = Slot { source: m.clone(), facts: OnceLock::new(), seeds: OnceLock::new() };
                (m.qualified_name.clone(), slot)
            })
            .collect();
        Program { slots, whole_program, builtins, warnings }
    }

    pub fn is_whole_program(&self) -> bool {
        self.whole_program
    }

    pub fn builtins(&self) -> &BuiltinTable {
        &self.builtins
    }

    pub fn modules(&self) -> impl Iterator<Item = &SourceModule> {
        self.slots.values().map(|s| &s.source)
    }

    pub fn facts(&self, module: &str) -> Option<Arc<ModuleFacts>> {
        let slot = self.slots.get(module)?;
        let facts = slot.facts.get_or_init(|| {
            let parsed = parse_module(&slot.source).inspect_err(|e| warn!("{e}"))?;
            Ok(Arc::new(previsit(module, slot.source.is_package, parsed)))
        });
        facts.as_ref().ok().cloned()
    }

    /// Modules that failed to load so far.
    pub fn errors(&self) -> Vec<ModuleError> {
        self.slots.values().filter_map(|s| s.facts.get()?.as_ref().err().cloned()).collect()
    }

    pub fn module_ident(&self, name: &str) -> Ident {
        if self.facts(name).is_some() {
            Ident::module(name)
        } else {
            Ident::ext_module(name)
        }
    }

    pub fn function(&self, ident: &Ident) -> Option<Arc<FunctionDef>> {
        if ident.kind() != Kind::Func || ident.is_stub() {
            return None;
        }
        self.facts(ident.module_name())?.functions.get(ident).cloned()
    }

    pub fn class(&self, ident: &Ident) -> Option<Arc<ClassDef>> {
        let cls = ident.class_of()?;
        if cls.is_stub() {
            return None;
        }
        self.facts(cls.module_name())?.classes.get(&cls).cloned()
    }

    /// Identifier a name refers to inside `func`: a local of `func`, a local
    /// of an enclosing function, or a module global.
    pub fn var_ident(&self, func: &FunctionDef, name: &str) -> Ident {
        let global = || Ident::module(&func.module).child(Kind::Var, name);
        if func.is_module_body || func.globals.contains(name) {
            return global();
        }
        if func.is_local(name) {
            return func.ident.child(Kind::Var, name);
        }
        let mut parent = func.parent.clone();
        while let Some(p) = parent {
            let Some(def) = self.function(&p) else { break };
            if def.is_module_body || def.globals.contains(name) {
                break;
            }
            if def.is_local(name) {
                return def.ident.child(Kind::Var, name);
            }
            parent = def.parent.clone();
        }
        global()
    }

    /// Flow-insensitive value of a module-level name.
    pub fn resolve_global(&self, module: &str, name: &str) -> BTreeSet<Ident> {
        self.static_name(module, name, 0)
    }

    /// Static pointees of a module global (`m.x`) or class attribute
    /// (`m.K.x`). These stand in for relations no FTG has recorded yet.
    pub fn seed(&self, var: &Ident) -> Option<BTreeSet<Ident>> {
        if var.kind() != Kind::Var {
            return None;
        }
        let module = var.module_name();
        let slot = self.slots.get(module)?;
        self.facts(module)?;
        let seeds = slot.seeds.get_or_init(|| Arc::new(self.compute_seeds(module)));
        if let Some(s) = seeds.get(var) {
            return Some(s.clone());
        }
        // Names pulled in by `from x import *` are not in the top table.
        let parent = var.parent()?;
        if parent.kind() != Kind::Mod {
            return None;
        }
        let found = self.static_name(module, var.name(), 0);
        (!found.is_empty()).then_some(found)
    }

    /// Static value of an expression evaluated at module level, used for
    /// parameter defaults.
    pub fn static_value(&self, module: &str, e: &ast::Expr) -> BTreeSet<Ident> {
        self.static_expr(module, e, 0)
    }

    /// Names used inside `def` (or functions nested in it) that resolve to
    /// locals of an enclosing function.
    pub fn free_vars(&self, def: &FunctionDef) -> Vec<(String, Ident)> {
        def.free
            .get_or_init(|| {
                let Some(facts) = self.facts(&def.module) else { return Vec::new() };
                if def.is_module_body || def.parent.as_ref().is_none_or(|p| p.namespace().is_empty()) {
                    return Vec::new();
                }
                let mut names = BTreeSet::new();
                for (ident, f) in &facts.functions {
                    if ident != &def.ident && !ident.is_field_of(&def.ident) {
                        continue;
                    }
                    for node in f.cfg.nodes() {
                        for e in node.op.exprs() {
                            walk::walk(e, &mut |x| {
                                if let ast::Expr::Name(n) = x {
                                    names.insert(n.id.to_string());
                                }
                            });
                        }
                    }
                }
                names
                    .into_iter()
                    .filter_map(|n| {
                        let v = self.var_ident(def, &n);
                        let outer = v.parent().is_some_and(|p| p.kind() == Kind::Func && p != def.ident);
                        outer.then_some((n, v))
                    })
                    .collect()
            })
            .clone()
    }

    fn compute_seeds(&self, module: &str) -> Seeds {
        let mut seeds = Seeds::new();
        let Some(facts) = self.facts(module) else { return seeds };
        let m = Ident::module(module);
        for name in facts.top.keys() {
            let v = self.static_name(module, name, 0);
            if !v.is_empty() {
                seeds.insert(m.child(Kind::Var, name), v);
            }
        }
        for class in facts.classes.values() {
            for (name, value) in &class.attrs {
                let v = self.static_expr(module, value, 0);
                seeds.entry(class.ident.field(name)).or_default().extend(v);
            }
            for (name, nested) in &class.nested {
                seeds.entry(class.ident.field(name)).or_default().insert(nested.clone());
            }
        }
        seeds.retain(|_, v| !v.is_empty());
        seeds
    }

    fn static_name(&self, module: &str, name: &str, depth: u32) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        if depth > STATIC_DEPTH {
            return out;
        }
        let Some(facts) = self.facts(module) else { return out };
        if let Some(bindings) = facts.top.get(name) {
            for b in bindings {
                match b {
                    TopBinding::Func(i) | TopBinding::Class(i) => {
                        out.insert(i.clone());
                    }
                    TopBinding::Import(t) => out.extend(self.static_import(t, depth + 1)),
                    TopBinding::Value(e) => out.extend(self.static_expr(module, e, depth + 1)),
                }
            }
            return out;
        }
        if !name.starts_with('_') {
            for star in &facts.star_imports {
                if self.facts(star).is_some() {
                    out.extend(self.static_name(star, name, depth + 1));
                } else {
                    out.insert(Ident::ext_module(star).child(Kind::ExtMod, name));
                }
                if !out.is_empty() {
                    break;
                }
            }
        }
        out
    }

    pub fn resolve_import(&self, target: &ImportTarget) -> BTreeSet<Ident> {
        self.static_import(target, 0)
    }

    fn static_import(&self, target: &ImportTarget, depth: u32) -> BTreeSet<Ident> {
        match target {
            ImportTarget::Module(m) => BTreeSet::from([self.module_ident(m)]),
            ImportTarget::Member { module, name } => self.static_member(module, name, depth),
            ImportTarget::Star(_) => BTreeSet::new(),
        }
    }

    /// `module.name`: a module-level binding, else a submodule.
    fn static_member(&self, module: &str, name: &str, depth: u32) -> BTreeSet<Ident> {
        let sub = format!("{module}.{name}");
        if self.facts(module).is_some() {
            let found = self.static_name(module, name, depth);
            if found.is_empty() && self.facts(&sub).is_some() {
                return BTreeSet::from([Ident::module(&sub)]);
            }
            return found;
        }
        if self.facts(&sub).is_some() {
            return BTreeSet::from([Ident::module(&sub)]);
        }
        BTreeSet::from([Ident::ext_module(module).child(Kind::ExtMod, name)])
    }

    /// Member of a module, for attribute loads on module pointees.
    pub fn module_member(&self, module: &Ident, name: &str) -> BTreeSet<Ident> {
        match module.kind() {
            Kind::Mod => self.static_member(module.name(), name, 0),
            Kind::ExtMod => BTreeSet::from([module.child(Kind::ExtMod, name)]),
            _ => BTreeSet::new(),
        }
    }

    /// Value of a builtin-scope name.
    pub fn builtin_name(&self, name: &str) -> Option<Ident> {
        self.builtins.global(name).map(|e| e.callee.clone())
    }

    fn static_expr(&self, module: &str, e: &ast::Expr, depth: u32) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        if depth > STATIC_DEPTH {
            return out;
        }
        if let Some(kind) = builtins::literal_class(e) {
            out.insert(builtins::instance(kind));
            return out;
        }
        match e {
            ast::Expr::Name(n) => {
                out = self.static_name(module, &n.id, depth + 1);
                if out.is_empty() {
                    out.extend(self.builtin_name(&n.id));
                }
            }
            ast::Expr::Attribute(a) => {
                for t in self.static_expr(module, &a.value, depth + 1) {
                    out.extend(self.static_attr(&t, &a.attr, depth + 1));
                }
            }
            ast::Expr::Call(c) => {
                for t in self.static_expr(module, &c.func, depth + 1) {
                    match t.kind() {
                        Kind::Cls if t.is_builtin() => {
                            out.extend(self.builtins.global(t.name()).and_then(|e| e.result.clone()));
                        }
                        Kind::Cls if !t.is_stub() => {
                            out.insert(t.instance());
                        }
                        Kind::Func if t.is_builtin() => {
                            out.extend(self.builtins.global(t.name()).and_then(|e| e.result.clone()));
                        }
                        _ => {}
                    }
                }
            }
            ast::Expr::Lambda(l) => {
                if let Some(f) = self.facts(module) {
                    out.extend(f.lambdas.get(&l.range.start().to_u32()).cloned());
                }
            }
            ast::Expr::IfExp(x) => {
                out.extend(self.static_expr(module, &x.body, depth + 1));
                out.extend(self.static_expr(module, &x.orelse, depth + 1));
            }
            _ => {}
        }
        out
    }

    fn static_attr(&self, t: &Ident, attr: &str, depth: u32) -> BTreeSet<Ident> {
        match t.kind() {
            Kind::Mod => self.static_member(t.name(), attr, depth),
            Kind::ExtMod => BTreeSet::from([t.child(Kind::ExtMod, attr)]),
            Kind::Cls | Kind::Obj => {
                let Ok(chain) = self.mro(t) else { return BTreeSet::new() };
                for c in chain.iter() {
                    if let Some(def) = self.class(c) {
                        if let Some((_, v)) = def.attrs.iter().rev().find(|(n, _)| n == attr) {
                            return self.static_expr(&def.module, v, depth + 1);
                        }
                        if let Some(n) = def.nested.get(attr) {
                            return BTreeSet::from([n.clone()]);
                        }
                        if let Some(m) = def.methods.get(attr) {
                            return BTreeSet::from([m.clone()]);
                        }
                    } else if c.is_stub() && !c.is_builtin() {
                        return BTreeSet::from([c.child(Kind::ExtMod, attr)]);
                    }
                }
                BTreeSet::new()
            }
            _ => BTreeSet::new(),
        }
    }

    /// Resolved base classes. `object` is left implicit; unresolvable bases
    /// become external stubs named after the expression.
    pub fn bases(&self, cls: &Ident) -> Vec<Ident> {
        let Some(def) = self.class(cls) else { return Vec::new() };
        def.resolved_bases
            .get_or_init(|| {
                let mut out = Vec::new();
                for b in &def.bases {
                    let found: Vec<Ident> = self
                        .static_expr(&def.module, b, 0)
                        .into_iter()
                        .filter(|t| matches!(t.kind(), Kind::Cls | Kind::ExtMod))
                        .filter(|t| !(t.is_builtin() && t.name() == "object"))
                        .collect();
                    if found.is_empty() {
                        let name = dotted_expr(b).unwrap_or_else(|| "<base>".into());
                        debug!("{}: base `{name}` unresolved, using a stub", def.ident);
                        out.push(Ident::ext_module(&name));
                    }
                    for t in found {
                        if !out.contains(&t) {
                            out.push(t);
                        }
                    }
                }
                out
            })
            .clone()
    }

    pub fn mro(&self, cls: &Ident) -> Result<Arc<[Ident]>, MroError> {
        let Some(c) = cls.class_of().or_else(|| (cls.kind() == Kind::ExtMod).then(|| cls.clone())) else {
            return Ok(Arc::from(Vec::new()));
        };
        let Some(def) = self.class(&c) else { return Ok(Arc::from(vec![c])) };
        def.mro
            .get_or_init(|| {
                let r = mro::linearize(&c, &|k| self.bases(k)).map(Arc::from);
                if let Err(e) = &r {
                    warn!("{e}");
                }
                r
            })
            .clone()
    }

    /// First method named `name` along the MRO of `cls`. External bases
    /// answer with a stub; builtin bases never do.
    pub fn lookup_member(&self, cls: &Ident, name: &str) -> Option<Ident> {
        let chain = self.mro(cls).ok()?;
        for c in chain.iter() {
            if let Some(def) = self.class(c) {
                if let Some(m) = def.methods.get(name) {
                    return Some(m.clone());
                }
            } else if c.is_stub() && !c.is_builtin() {
                return Some(c.child(Kind::ExtMod, name));
            }
        }
        None
    }

    /// Every function (module bodies included) in modules that pass `filter`.
    pub fn functions_where(&self, filter: impl Fn(&SourceModule) -> bool) -> Vec<Ident> {
        let mut out = Vec::new();
        for (name, slot) in &self.slots {
            if !filter(&slot.source) {
                continue;
            }
            if let Some(f) = self.facts(name) {
                out.extend(f.functions.keys().cloned());
            }
        }
        out
    }

    /// Function or module body by dotted name.
    pub fn find_function(&self, qualname: &str) -> Option<Ident> {
        for name in self.slots.keys().rev() {
            if qualname != name && !qualname.starts_with(&format!("{name}.")) {
                continue;
            }
            let Some(f) = self.facts(name) else { continue };
            if let Some(found) = f.functions.keys().find(|i| i.dotted() == qualname) {
                return Some(found.clone());
            }
        }
        None
    }

    pub fn function_summary(&self) -> FunctionSummary {
        let mut s = FunctionSummary::default();
        for f in self.loaded() {
            for (ident, def) in &f.functions {
                if !def.is_module_body {
                    let params = def.params.iter().map(|p| p.name.clone()).collect();
                    s.entries.insert(ident.clone(), params);
                }
            }
        }
        s
    }

    pub fn class_summary(&self) -> ClassSummary {
        let mut s = ClassSummary::default();
        for f in self.loaded() {
            for (ident, def) in &f.classes {
                for b in self.bases(ident) {
                    s.hier.insert((b, ident.clone()));
                }
                for m in def.methods.values() {
                    s.incl.insert((ident.clone(), m.clone()));
                }
            }
        }
        s
    }

    pub fn import_summary(&self) -> ImportSummary {
        let mut s = ImportSummary::default();
        for f in self.loaded() {
            for entry in &f.imports {
                let target = match &entry.target {
                    ImportTarget::Module(m) => self.module_ident(m),
                    ImportTarget::Member { module, name } => self.module_ident(module).child(Kind::Var, name),
                    ImportTarget::Star(m) => self.module_ident(m).child(Kind::Var, "*"),
                };
                s.entries.insert((entry.source.clone(), target, entry.site.clone()));
            }
        }
        s
    }

    fn loaded(&self) -> Vec<Arc<ModuleFacts>> {
        self.slots.keys().filter_map(|m| self.facts(m)).collect()
    }
}

fn dotted_expr(e: &ast::Expr) -> Option<String> {
    match e {
        ast::Expr::Name(n) => Some(n.id.to_string()),
        ast::Expr::Attribute(a) => Some(format!("{}.{}", dotted_expr(&a.value)?, a.attr)),
        _ => None,
    }
}
