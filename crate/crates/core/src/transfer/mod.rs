//! Transfer rules: evaluating one CFG node against the current FTG.
//!
//! Relations always point at non-var types. A binding `x = y` records the
//! pointees of `y` at the assignment site rather than a chain to `y`, so
//! later rebinding of `y` does not leak into `x`.

pub mod builtins;
pub mod kwargs;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rustpython_parser::ast::{self, Expr};

use crate::facts::ident::{Ident, Kind};
use crate::facts::summary::{FunctionDef, MethodKind, ParamKind};
use crate::facts::Program;
use crate::ftg::{Ftg, Relation};
use crate::inter::{Outcome, Session};
use crate::source::cfg::{ImportTarget, Op};
use crate::source::site::ExprSite;
use kwargs::{kwargs_bind, ArgRef, CallShape};

/// Field prefix under a function value for the free variables it captured
/// at definition time.
pub const FREE_PREFIX: &str = "<free>";

/// What evaluating one node produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delta {
    pub relations: BTreeSet<Relation>,
    pub resolved_calls: BTreeSet<(ExprSite, Ident)>,
}

/// Applies the rule for `node` of `def` to `g` in place and returns the
/// relations and calls it produced.
pub fn apply_transfer_rule(sess: &mut Session<'_>, def: &FunctionDef, node: usize, g: &mut Ftg) -> Delta {
    let n = def.cfg.node(node);
    let mut ev = Eval { program: sess.program(), sess, def, site: n.site.clone(), g, delta: Delta::default() };
    ev.node(&n.op);
    ev.delta
}

/// Argument values at a call site.
#[derive(Debug, Clone, Default)]
pub struct Args {
    pub positional: Vec<BTreeSet<Ident>>,
    pub star_at: Option<usize>,
    pub keywords: Vec<(Option<String>, BTreeSet<Ident>)>,
}

impl Args {
    fn shape(&self) -> CallShape {
        CallShape {
            positional: self.positional.len(),
            star_at: self.star_at,
            keywords: self.keywords.iter().map(|(k, _)| k.clone()).collect(),
        }
    }

    fn single(types: BTreeSet<Ident>) -> Self {
        Args { positional: vec![types], ..Args::default() }
    }
}

#[derive(Debug, Clone)]
enum Callee {
    /// An analysable function, optionally with a bound first parameter.
    Func { ident: Ident, recv: Option<BTreeSet<Ident>> },
    New(Ident),
    Stub { ident: Ident, result: Option<Ident> },
    Value(Ident),
}

struct Eval<'a, 'p> {
    program: &'p Program,
    sess: &'a mut Session<'p>,
    def: &'a FunctionDef,
    site: ExprSite,
    g: &'a mut Ftg,
    delta: Delta,
}

fn is_user(t: &Ident) -> bool {
    !t.kind().is_var() && !t.is_stub()
}

impl Eval<'_, '_> {
    fn var(&self, name: &str) -> Ident {
        self.program.var_ident(self.def, name)
    }

    fn lookup(&self, v: &Ident) -> BTreeSet<Ident> {
        let p = self.program;
        self.g.points_of_with(v, &|x| p.seed(x))
    }

    fn write(&mut self, src: &Ident, types: &BTreeSet<Ident>, strong: bool) {
        if strong {
            self.g.bind(src, types.iter().cloned(), &self.site);
        }
        for t in types {
            let r = Relation::new(src.clone(), t.clone(), self.site.clone());
            if !strong {
                self.g.insert(r.clone());
            }
            self.delta.relations.insert(r);
        }
    }

    fn node(&mut self, op: &Op) {
        match op {
            Op::Entry | Op::Exit | Op::Nop => {}
            Op::Expr(e) | Op::Test(e) => {
                self.eval(e);
            }
            Op::Assign { targets, value } => self.assign(targets, value),
            Op::AugAssign { target, value } => {
                self.eval(value);
                self.eval(target);
            }
            Op::AnnAssign { target, value } => {
                if let Some(v) = value {
                    self.assign(std::slice::from_ref(target), v);
                }
            }
            Op::Return(v) => {
                let types = v.as_ref().map(|e| self.eval(e)).unwrap_or_default();
                let ret = self.def.ident.ret();
                self.write(&ret, &types, true);
            }
            Op::Raise(v) => {
                if let Some(e) = v {
                    for t in self.eval(e) {
                        if t.kind() == Kind::Cls && is_user(&t) {
                            self.invoke_all(vec![Callee::New(t)], Args::default());
                        }
                    }
                }
            }
            Op::Delete(targets) => {
                for t in targets {
                    if let Expr::Name(n) = t {
                        let v = self.var(&n.id);
                        self.g.kill(&v);
                    } else {
                        self.eval(t);
                    }
                }
            }
            Op::Import(items) => {
                for item in items {
                    self.run_module_bodies(&item.target);
                    if matches!(item.target, ImportTarget::Star(_)) {
                        continue;
                    }
                    let types = self.program.resolve_import(&item.target);
                    let v = self.var(&item.bind);
                    self.write(&v, &types, true);
                }
            }
            Op::Def { func, name, decorators } => {
                self.capture(func);
                let fv = self.decorate(func, decorators);
                let v = self.var(name);
                self.write(&v, &fv, true);
            }
            Op::Class(c) => {
                for b in &c.bases {
                    self.eval(b);
                }
                for (m, decorators) in &c.methods {
                    let value = self.decorate(m, decorators);
                    if value.len() != 1 || !value.contains(m) {
                        self.write(&c.class.field(m.name()), &value, true);
                    }
                }
                for (name, value) in &c.attrs {
                    let types = self.eval(value);
                    self.write(&c.class.field(name), &types, true);
                }
                let value = self.decorate(&c.class, &c.decorators);
                let v = self.var(&c.name);
                self.write(&v, &value, true);
            }
            Op::ForHeader { target, iter } => {
                let its = self.eval(iter);
                let items = self.iterate(its);
                self.bind(target, &items);
            }
            Op::WithEnter { context, target, slot } => {
                let managers = self.eval(context);
                let slot_var = self.def.ident.child(Kind::Var, slot);
                self.write(&slot_var, &managers, true);
                let mut entered = BTreeSet::new();
                for m in managers {
                    if m.kind() == Kind::Obj && is_user(&m) {
                        entered.extend(self.call_method(&m, "__enter__", Args::default()));
                    } else if m.is_builtin() {
                        match self.program.builtins().on_instance(&m, "__enter__").cloned() {
                            Some(e) => {
                                entered.extend(self.invoke_all(vec![stub(e.callee, e.result)], Args::default()));
                            }
                            None => {
                                entered.insert(m);
                            }
                        }
                    }
                }
                if let Some(t) = target {
                    self.bind(t, &entered);
                }
            }
            Op::WithExit { slot } => {
                let slot_var = self.def.ident.child(Kind::Var, slot);
                let none = BTreeSet::from([builtins::instance("NoneType")]);
                let args = Args { positional: vec![none.clone(), none.clone(), none], ..Args::default() };
                for m in self.lookup(&slot_var) {
                    if m.kind() == Kind::Obj && is_user(&m) {
                        self.call_method(&m, "__exit__", args.clone());
                    } else if let Some(e) = self.program.builtins().on_instance(&m, "__exit__").cloned() {
                        self.invoke_all(vec![stub(e.callee, e.result)], Args::default());
                    }
                }
                self.g.kill(&slot_var);
            }
            Op::Handler { kind, name } => {
                let mut caught = BTreeSet::new();
                if let Some(k) = kind {
                    for t in self.eval(k) {
                        if t.kind() == Kind::Cls {
                            caught.insert(t.instance());
                        }
                    }
                }
                if let Some(n) = name {
                    let v = self.var(n);
                    self.write(&v, &caught, true);
                }
            }
        }
    }

    fn assign(&mut self, targets: &[Expr], value: &Expr) {
        let elements = match value {
            Expr::Tuple(t) => Some(&t.elts),
            Expr::List(l) => Some(&l.elts),
            _ => None,
        };
        let Some(elts) = elements.filter(|es| !es.iter().any(|e| matches!(e, Expr::Starred(_)))) else {
            let types = self.eval(value);
            for t in targets {
                self.bind(t, &types);
            }
            return;
        };
        let parts: Vec<BTreeSet<Ident>> = elts.iter().map(|e| self.eval(e)).collect();
        let whole = BTreeSet::from([builtins::instance(builtins::literal_class(value).unwrap_or("tuple"))]);
        for t in targets {
            match t {
                Expr::Tuple(x) if x.elts.len() == parts.len() => {
                    for (e, p) in x.elts.iter().zip(&parts) {
                        self.bind(e, p);
                    }
                }
                Expr::List(x) if x.elts.len() == parts.len() => {
                    for (e, p) in x.elts.iter().zip(&parts) {
                        self.bind(e, p);
                    }
                }
                _ => self.bind(t, &whole),
            }
        }
    }

    fn bind(&mut self, target: &Expr, types: &BTreeSet<Ident>) {
        match target {
            Expr::Name(n) => {
                let v = self.var(&n.id);
                self.write(&v, types, true);
            }
            Expr::Attribute(a) => {
                let owners: Vec<Ident> = self.eval(&a.value).into_iter().filter(is_user).collect();
                let strong = owners.len() == 1;
                for o in owners {
                    self.write(&o.field(&a.attr), types, strong);
                }
            }
            Expr::Tuple(t) => t.elts.iter().for_each(|e| self.bind(e, &BTreeSet::new())),
            Expr::List(l) => l.elts.iter().for_each(|e| self.bind(e, &BTreeSet::new())),
            Expr::Starred(s) => self.bind(&s.value, &BTreeSet::new()),
            Expr::Subscript(s) => {
                self.eval(&s.value);
                self.eval(&s.slice);
            }
            other => {
                self.eval(other);
            }
        }
    }

    fn eval(&mut self, e: &Expr) -> BTreeSet<Ident> {
        match e {
            Expr::Name(n) => self.name(&n.id),
            Expr::Attribute(a) => {
                let mut out = BTreeSet::new();
                for t in self.eval(&a.value) {
                    out.extend(self.load(&t, &a.attr));
                }
                out
            }
            Expr::Call(c) => self.call(c),
            Expr::Lambda(l) => {
                let facts = self.program.facts(&self.def.module);
                match facts.and_then(|f| f.lambdas.get(&l.range.start().to_u32()).cloned()) {
                    Some(f) => {
                        self.capture(&f);
                        BTreeSet::from([f])
                    }
                    None => BTreeSet::new(),
                }
            }
            Expr::NamedExpr(n) => {
                let types = self.eval(&n.value);
                self.bind(&n.target, &types);
                types
            }
            Expr::IfExp(x) => {
                self.eval(&x.test);
                let mut out = self.eval(&x.body);
                out.extend(self.eval(&x.orelse));
                out
            }
            Expr::BoolOp(b) => {
                let mut out = BTreeSet::new();
                for v in &b.values {
                    out.extend(self.eval(v));
                }
                out
            }
            Expr::Await(a) => self.eval(&a.value),
            Expr::Yield(y) => {
                if let Some(v) = &y.value {
                    let types = self.eval(v);
                    let ret = self.def.ident.ret();
                    self.write(&ret, &types, false);
                }
                BTreeSet::new()
            }
            Expr::YieldFrom(y) => {
                let types = self.eval(&y.value);
                let items = self.iterate(types);
                let ret = self.def.ident.ret();
                self.write(&ret, &items, false);
                BTreeSet::new()
            }
            Expr::ListComp(_) | Expr::SetComp(_) | Expr::DictComp(_) | Expr::GeneratorExp(_) => {
                self.comprehension(e);
                builtins::literal_class(e).map(|k| BTreeSet::from([builtins::instance(k)])).unwrap_or_default()
            }
            Expr::Starred(s) => self.eval(&s.value),
            Expr::Compare(_) => {
                self.eval_children(e);
                BTreeSet::from([builtins::instance("bool")])
            }
            other => {
                self.eval_children(other);
                match builtins::literal_class(other) {
                    Some(k) => BTreeSet::from([builtins::instance(k)]),
                    None => BTreeSet::new(),
                }
            }
        }
    }

    fn eval_children(&mut self, e: &Expr) {
        for c in crate::source::walk::children(e) {
            self.eval(c);
        }
    }

    fn comprehension(&mut self, e: &Expr) {
        let (gens, elts): (&[ast::Comprehension], Vec<&Expr>) = match e {
            Expr::ListComp(x) => (&x.generators, vec![&x.elt]),
            Expr::SetComp(x) => (&x.generators, vec![&x.elt]),
            Expr::GeneratorExp(x) => (&x.generators, vec![&x.elt]),
            Expr::DictComp(x) => (&x.generators, vec![&x.key, &x.value]),
            _ => return,
        };
        for g in gens {
            let its = self.eval(&g.iter);
            let items = self.iterate(its);
            self.bind(&g.target, &items);
            for cond in &g.ifs {
                self.eval(cond);
            }
        }
        for elt in elts {
            self.eval(elt);
        }
    }

    fn name(&mut self, id: &str) -> BTreeSet<Ident> {
        let v = self.var(id);
        let found = self.lookup(&v);
        if !found.is_empty() || self.g.get(&v).is_some() {
            return found;
        }
        let is_global = v.parent().is_some_and(|p| p.kind() == Kind::Mod);
        match self.program.builtin_name(id) {
            Some(b) if is_global => BTreeSet::from([b]),
            _ => BTreeSet::new(),
        }
    }

    /// `t.attr` as a value.
    fn load(&mut self, t: &Ident, attr: &str) -> BTreeSet<Ident> {
        match t.kind() {
            Kind::Obj if is_user(t) => {
                let own = self.lookup(&t.field(attr));
                if !own.is_empty() {
                    return own;
                }
                self.class_attr(t, attr)
            }
            Kind::Cls if is_user(t) => self.class_attr(t, attr),
            Kind::Mod => {
                let global = t.field(attr);
                if self.g.get(&global).is_some() {
                    return self.lookup(&global);
                }
                self.program.module_member(t, attr)
            }
            Kind::ExtMod => BTreeSet::from([t.child(Kind::ExtMod, attr)]),
            Kind::Func if is_user(t) => self.lookup(&t.field(attr)),
            _ => BTreeSet::new(),
        }
    }

    /// Attribute of a class (or of an instance through its class): class
    /// fields first, then methods, walking the MRO.
    fn class_attr(&self, t: &Ident, attr: &str) -> BTreeSet<Ident> {
        let Ok(chain) = self.program.mro(t) else { return BTreeSet::new() };
        for c in chain.iter() {
            if let Some(def) = self.program.class(c) {
                let field = c.field(attr);
                let v = self.lookup(&field);
                if !v.is_empty() {
                    return v;
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

    fn args(&mut self, c: &ast::ExprCall) -> Args {
        let mut args = Args::default();
        for a in &c.args {
            match a {
                Expr::Starred(s) => {
                    self.eval(&s.value);
                    args.star_at.get_or_insert(args.positional.len());
                }
                _ => {
                    let t = self.eval(a);
                    if args.star_at.is_none() {
                        args.positional.push(t);
                    }
                }
            }
        }
        for k in &c.keywords {
            let t = self.eval(&k.value);
            args.keywords.push((k.arg.as_ref().map(|a| a.to_string()), t));
        }
        args
    }

    fn call(&mut self, c: &ast::ExprCall) -> BTreeSet<Ident> {
        let callees = self.callees(&c.func);
        let args = self.args(c);
        if callees.is_empty() {
            self.sess.unresolved(&self.site, &c.func);
        }
        self.invoke_all(callees, args)
    }

    /// Resolves the function expression of a call.
    fn callees(&mut self, func: &Expr) -> Vec<Callee> {
        let Expr::Attribute(a) = func else {
            return self.eval(func).into_iter().filter_map(|t| self.plain(t)).collect();
        };
        if let Expr::Call(inner) = &*a.value {
            if matches!(&*inner.func, Expr::Name(n) if n.id.as_str() == "super") {
                return self.super_callees(&a.attr);
            }
        }
        let mut out = Vec::new();
        for r in self.eval(&a.value) {
            match r.kind() {
                Kind::Obj if r.is_builtin() => {
                    if let Some(e) = self.program.builtins().on_instance(&r, &a.attr) {
                        out.push(stub(e.callee.clone(), e.result.clone()));
                    }
                }
                Kind::Obj | Kind::Cls if is_user(&r) => out.extend(self.member_callees(&r, &a.attr)),
                _ => {
                    for t in self.load(&r, &a.attr) {
                        out.extend(self.plain(t));
                    }
                }
            }
        }
        out
    }

    fn member_callees(&mut self, r: &Ident, attr: &str) -> Vec<Callee> {
        if r.kind() == Kind::Obj {
            let own = self.lookup(&r.field(attr));
            if !own.is_empty() {
                return own.into_iter().filter_map(|t| self.plain(t)).collect();
            }
        }
        let Ok(chain) = self.program.mro(r) else { return Vec::new() };
        for c in chain.iter() {
            if let Some(def) = self.program.class(c) {
                let v = self.lookup(&c.field(attr));
                if !v.is_empty() {
                    return v.into_iter().filter_map(|t| self.plain(t)).collect();
                }
                if let Some(m) = def.methods.get(attr) {
                    return self.method(m, r).into_iter().collect();
                }
            } else if c.is_stub() && !c.is_builtin() {
                return vec![stub(c.child(Kind::ExtMod, attr), None)];
            }
        }
        Vec::new()
    }

    /// Method `m` reached through receiver `r` (an instance or a class).
    fn method(&self, m: &Ident, r: &Ident) -> Option<Callee> {
        let Some(def) = self.program.function(m) else {
            return Some(stub(m.clone(), None));
        };
        let recv = match def.method {
            MethodKind::Instance if r.kind() == Kind::Obj => Some(BTreeSet::from([r.clone()])),
            MethodKind::Class => r.class_of().map(|c| BTreeSet::from([c])),
            _ => None,
        };
        Some(Callee::Func { ident: m.clone(), recv })
    }

    /// `super().attr`: the class after the defining class in the MRO of
    /// each receiver's class.
    fn super_callees(&mut self, attr: &str) -> Vec<Callee> {
        let Some(cls) = self.def.class.clone() else { return Vec::new() };
        let Some(first) = self.def.params.first() else { return Vec::new() };
        let recv = self.lookup(&self.def.ident.child(Kind::Var, &first.name));
        let mut owners: BTreeSet<Ident> = recv.iter().filter_map(Ident::class_of).filter(is_user).collect();
        if owners.is_empty() {
            owners.insert(cls.clone());
        }
        let mut out = Vec::new();
        for owner in owners {
            let Ok(chain) = self.program.mro(&owner) else { continue };
            let Some(pos) = chain.iter().position(|c| *c == cls) else { continue };
            let instances: BTreeSet<Ident> = recv.iter().filter(|r| r.class_of().as_ref() == Some(&owner)).cloned().collect();
            for c in chain.iter().skip(pos + 1) {
                if let Some(def) = self.program.class(c) {
                    if let Some(m) = def.methods.get(attr) {
                        let Some(mdef) = self.program.function(m) else { break };
                        let recv = match mdef.method {
                            MethodKind::Instance => Some(instances.clone()),
                            MethodKind::Class => Some(BTreeSet::from([owner.clone()])),
                            _ => None,
                        };
                        out.push(Callee::Func { ident: m.clone(), recv });
                        break;
                    }
                } else if c.is_stub() && !c.is_builtin() {
                    out.push(stub(c.child(Kind::ExtMod, attr), None));
                    break;
                }
            }
        }
        out
    }

    /// Calling a value directly.
    fn plain(&self, t: Ident) -> Option<Callee> {
        match t.kind() {
            Kind::Func if t.is_builtin() => {
                let result = self.program.builtins().global(t.name()).and_then(|e| e.result.clone());
                Some(stub(t, result))
            }
            Kind::Func if self.program.function(&t).is_some() => Some(Callee::Func { ident: t, recv: None }),
            Kind::Cls if t.is_builtin() => {
                let result = self.program.builtins().global(t.name()).and_then(|e| e.result.clone());
                Some(Callee::Value(result.unwrap_or_else(|| t.instance())))
            }
            Kind::Cls if is_user(&t) => Some(Callee::New(t)),
            Kind::Obj if is_user(&t) => {
                let m = self.program.lookup_member(&t, "__call__")?;
                self.method(&m, &t)
            }
            Kind::ExtMod | Kind::Func => Some(stub(t, None)),
            _ => None,
        }
    }

    /// Calls method `name` on instance `obj`, returning its result.
    fn call_method(&mut self, obj: &Ident, name: &str, args: Args) -> BTreeSet<Ident> {
        let callees: Vec<Callee> = match self.program.lookup_member(obj, name) {
            Some(m) => self.method(&m, obj).into_iter().collect(),
            None => Vec::new(),
        };
        self.invoke_all(callees, args)
    }

    /// Records edges, analyses callees, folds their effects into the FTG
    /// and returns the union of their results. A single analysed callee
    /// updates strongly; several merge weakly.
    fn invoke_all(&mut self, callees: Vec<Callee>, args: Args) -> BTreeSet<Ident> {
        let mut result = BTreeSet::new();
        let mut funcs: BTreeMap<(Ident, bool), Option<BTreeSet<Ident>>> = BTreeMap::new();
        let mut inits = Vec::new();
        for c in callees {
            match c {
                Callee::Func { ident, recv } => {
                    let slot = funcs.entry((ident, recv.is_some())).or_insert_with(|| recv.as_ref().map(|_| BTreeSet::new()));
                    if let (Some(acc), Some(r)) = (slot.as_mut(), recv) {
                        acc.extend(r);
                    }
                }
                Callee::New(cls) => {
                    result.insert(cls.instance());
                    match self.program.lookup_member(&cls, "__init__") {
                        Some(init) if self.program.function(&init).is_some() => {
                            funcs
                                .entry((init, true))
                                .or_insert_with(|| Some(BTreeSet::new()))
                                .get_or_insert_with(BTreeSet::new)
                                .insert(cls.instance());
                        }
                        Some(init) => inits.push(init),
                        None => {}
                    }
                }
                Callee::Stub { ident, result: r } => {
                    self.edge(&ident);
                    result.extend(r);
                }
                Callee::Value(v) => {
                    result.insert(v);
                }
            }
        }
        for init in inits {
            self.edge(&init);
        }

        let strong = funcs.len() == 1;
        let mut pending = Vec::new();
        for ((ident, _), recv) in funcs {
            self.edge(&ident);
            let Some(def) = self.program.function(&ident) else { continue };
            let Some(outcome) = self.invoke(&def, recv, &args) else { continue };
            if !ident.name().eq("__init__") {
                result.extend(outcome.ret.iter().cloned());
            }
            pending.extend(delta_of(&outcome, &self.site));
        }
        // Captured variables accumulate: one closure identifier stands for
        // every closure created from its definition.
        let (captured, plain): (Vec<Relation>, Vec<Relation>) =
            pending.iter().cloned().partition(|r| r.src.name().starts_with(FREE_PREFIX));
        if strong {
            self.g.strong_update(plain);
        } else {
            self.g.weak_update(plain);
        }
        self.g.weak_update(captured);
        self.delta.relations.extend(pending);
        result
    }

    fn edge(&mut self, callee: &Ident) {
        self.sess.record_edge(&self.def.ident, callee, &self.site);
        self.delta.resolved_calls.insert((self.site.clone(), callee.clone()));
    }

    /// Builds the callee's input graph from θ and runs it.
    fn invoke(&mut self, def: &Arc<FunctionDef>, recv: Option<BTreeSet<Ident>>, args: &Args) -> Option<Arc<Outcome>> {
        let g_in = compute_param_types(self.program, def, recv.as_ref(), args, self.g, &mut self.sess.diagnostics);
        self.sess.analyze(def, g_in)
    }

    fn iterate(&mut self, its: BTreeSet<Ident>) -> BTreeSet<Ident> {
        let mut items = BTreeSet::new();
        for t in its {
            if t.is_builtin() {
                continue;
            }
            if t.kind() == Kind::Obj && self.program.lookup_member(&t, "__iter__").is_some() {
                for it in self.call_method(&t, "__iter__", Args::default()) {
                    if it.kind() == Kind::Obj && is_user(&it) && self.program.lookup_member(&it, "__next__").is_some() {
                        items.extend(self.call_method(&it, "__next__", Args::default()));
                    }
                }
                continue;
            }
            items.insert(t);
        }
        items
    }

    /// Records, under the function value, what its free variables point to
    /// at the definition site.
    fn capture(&mut self, func: &Ident) {
        let Some(def) = self.program.function(func) else { return };
        for (name, v) in self.program.free_vars(&def) {
            let types = self.lookup(&v);
            self.write(&func.field(&format!("{FREE_PREFIX}{name}")), &types, false);
        }
    }

    /// Importing runs the bodies of the module and its parent packages. No
    /// edge is recorded and nothing flows back; the importer sees module
    /// globals through their static values.
    fn run_module_bodies(&mut self, target: &ImportTarget) {
        let mut names = Vec::new();
        let base = match target {
            ImportTarget::Module(m) | ImportTarget::Star(m) => m,
            ImportTarget::Member { module, name } => {
                names.push(format!("{module}.{name}"));
                module
            }
        };
        let mut prefix = String::new();
        for part in base.split('.') {
            if !prefix.is_empty() {
                prefix.push('.');
            }
            prefix.push_str(part);
            names.push(prefix.clone());
        }
        names.sort_by_key(|n| n.len());
        for n in names {
            if n == *self.def.module {
                continue;
            }
            if let Some(body) = self.program.function(&Ident::module_body(&n)) {
                self.sess.analyze(&body, Ftg::new());
            }
        }
    }

    /// Applies decorators innermost first and returns what the name ends up
    /// bound to. Decorators whose result is unknown (builtins, stubs) leave
    /// the value as it was.
    fn decorate(&mut self, target: &Ident, decorators: &[Expr]) -> BTreeSet<Ident> {
        let mut current = BTreeSet::from([target.clone()]);
        for d in decorators.iter().rev() {
            let callees: Vec<Callee> = self.eval(d).into_iter().filter_map(|t| self.plain(t)).collect();
            let callees: Vec<Callee> = callees.into_iter().filter(|c| !matches!(c, Callee::Value(_))).collect();
            if callees.is_empty() {
                continue;
            }
            let result = self.invoke_all(callees, Args::single(current.clone()));
            if !result.is_empty() {
                current = result;
            }
        }
        current
    }
}

fn stub(ident: Ident, result: Option<Ident>) -> Callee {
    Callee::Stub { ident, result }
}

/// g_in for a call: parameters bound to argument pointees, the receiver
/// bound to the first parameter, defaults for the rest, then θ (fields of
/// every pointee passed in, and the callee's captured free variables), all
/// labelled with the callee's entry site.
pub fn compute_param_types(
    program: &Program,
    def: &FunctionDef,
    recv: Option<&BTreeSet<Ident>>,
    args: &Args,
    caller: &Ftg,
    diagnostics: &mut Vec<String>,
) -> Ftg {
    let entry = def.cfg.node(def.cfg.entry()).site.clone();
    let mut g_in = Ftg::new();
    let takes_recv =
        recv.is_some() && def.params.first().is_some_and(|p| matches!(p.kind, ParamKind::PosOnly | ParamKind::Normal));
    let params = if takes_recv { &def.params[1..] } else { &def.params[..] };
    if let (true, Some(r)) = (takes_recv, recv) {
        g_in.bind(&def.ident.child(Kind::Var, &def.params[0].name), r.iter().cloned(), &entry);
    }
    let binding = kwargs_bind(params, &args.shape());
    for d in binding.diagnostics {
        diagnostics.push(format!("{}: call to {}: {d}", entry.module, def.ident));
    }
    for p in params {
        let types = match binding.map.get(&p.name) {
            Some(ArgRef::Positional(i)) => args.positional[*i].clone(),
            Some(ArgRef::Keyword(j)) => args.keywords[*j].1.clone(),
            Some(ArgRef::Opaque) => continue,
            None => match &p.default {
                Some(d) => program.static_value(&def.module, d),
                None => continue,
            },
        };
        g_in.bind(&def.ident.child(Kind::Var, &p.name), types, &entry);
    }

    let mut roots: Vec<Ident> = g_in.relations().map(|r| r.dst).collect();
    roots.push(def.ident.clone());
    let mut seen = BTreeSet::new();
    while let Some(t) = roots.pop() {
        if !is_user(&t) || !seen.insert(t.clone()) {
            continue;
        }
        for (src, ts) in caller.fields_of(&t) {
            let captured = (t == def.ident).then(|| src.name().strip_prefix(FREE_PREFIX)).flatten();
            if t == def.ident && captured.is_none() {
                continue;
            }
            let src = match captured {
                Some(name) if src.parent().as_ref() == Some(&def.ident) => program.var_ident(def, name),
                _ => src.clone(),
            };
            for (d, _) in ts {
                g_in.insert(Relation::new(src.clone(), d.clone(), entry.clone()));
                roots.push(d.clone());
            }
        }
    }
    g_in
}

/// Relations a finished callee hands back to its caller at `site`: fields
/// and globals whose final pointees differ from what the callee started
/// with. Parameter rebinding and callee locals stay behind, and so do
/// fields of instances the caller cannot reach (created inside the callee
/// and never returned or stored anywhere reachable).
pub fn delta_of(outcome: &Outcome, site: &ExprSite) -> Vec<Relation> {
    let mut reachable: BTreeSet<&Ident> = outcome.ftg_in.relations_dsts().collect();
    reachable.extend(outcome.ret.iter());
    let owner_visible = |src: &Ident, reachable: &BTreeSet<&Ident>| match field_owner(src) {
        Some(o) if o.kind() == Kind::Obj => reachable.contains(&o),
        _ => true,
    };
    // Grow the reachable set through fields of reachable owners.
    loop {
        let before = reachable.len();
        for (src, ts) in outcome.ftg_out.entries() {
            if !crate::intra::is_local(src) && owner_visible(src, &reachable) {
                reachable.extend(ts.iter().map(|(d, _)| d));
            }
        }
        if reachable.len() == before {
            break;
        }
    }
    let mut out = Vec::new();
    for (src, ts) in outcome.ftg_out.entries() {
        if crate::intra::is_local(src) || src.is_ret() || !owner_visible(src, &reachable) {
            continue;
        }
        let after: BTreeSet<&Ident> = ts.iter().map(|(d, _)| d).collect();
        let before: Option<BTreeSet<&Ident>> = outcome.ftg_in.get(src).map(|t| t.iter().map(|(d, _)| d).collect());
        if before.as_ref() == Some(&after) {
            continue;
        }
        out.extend(after.into_iter().map(|d| Relation::new(src.clone(), d.clone(), site.clone())));
    }
    out
}

/// Outermost non-variable owner of a field path: `K` for `K.a.b`.
fn field_owner(src: &Ident) -> Option<Ident> {
    let mut cur = src.parent()?;
    while cur.kind() == Kind::Var {
        cur = cur.parent()?;
    }
    Some(cur)
}
