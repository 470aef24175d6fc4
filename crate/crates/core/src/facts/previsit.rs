//! Module previsit: lowers every function body to a CFG and records the
//! function, class and import summaries in one pass.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use log::debug;
use rustpython_parser::ast::{self, Ranged};

use crate::facts::ident::{Ident, Kind};
use crate::facts::summary::{
    ClassDef, FunctionDef, ImportEntry, MethodKind, ModuleFacts, Param, ParamKind, TopBinding,
};
use crate::source::cfg::{CfgBuilder, ClassOp, FunctionAst, ImportItem, ImportTarget, Lowering, Op};
use crate::source::site::{ExprSite, LineIndex};
use crate::source::{walk, ParsedModule};

struct Frame {
    ident: Ident,
    locals: BTreeSet<String>,
    globals: BTreeSet<String>,
    nonlocals: BTreeSet<String>,
    is_generator: bool,
}

struct Previsit<'a> {
    module: Arc<str>,
    is_package: bool,
    lines: &'a LineIndex,
    ns: Vec<Ident>,
    frames: Vec<Frame>,
    functions: BTreeMap<Ident, Arc<FunctionDef>>,
    classes: BTreeMap<Ident, Arc<ClassDef>>,
    lambdas: HashMap<u32, Ident>,
}

pub fn previsit(name: &str, is_package: bool, parsed: ParsedModule) -> ModuleFacts {
    let module: Arc<str> = name.into();
    let has_main_guard = parsed.suite.iter().any(is_main_guard);
    let mut pv = Previsit {
        module: module.clone(),
        is_package,
        lines: &parsed.lines,
        ns: vec![Ident::module(name)],
        frames: Vec::new(),
        functions: BTreeMap::new(),
        classes: BTreeMap::new(),
        lambdas: HashMap::new(),
    };
    let body = Ident::module_body(name);
    pv.frames.push(Frame::new(body.clone()));
    let cfg = CfgBuilder::new(&mut pv, 0).build(parsed.suite);
    let frame = pv.frames.pop().expect("module frame");
    let body_def = FunctionDef {
        ident: body.clone(),
        module: module.clone(),
        params: Vec::new(),
        method: MethodKind::Function,
        class: None,
        parent: None,
        cfg,
        locals: frame.locals,
        globals: BTreeSet::new(),
        nonlocals: BTreeSet::new(),
        is_generator: false,
        is_module_body: true,
        free: OnceLock::new(),
    };

    let mut top: BTreeMap<String, Vec<TopBinding>> = BTreeMap::new();
    let mut star_imports = Vec::new();
    for node in body_def.cfg.nodes() {
        match &node.op {
            Op::Def { func, name, .. } => top.entry(name.clone()).or_default().push(TopBinding::Func(func.clone())),
            Op::Class(c) => top.entry(c.name.clone()).or_default().push(TopBinding::Class(c.class.clone())),
            Op::Import(items) => {
                for item in items {
                    match &item.target {
                        ImportTarget::Star(m) => star_imports.push(m.clone()),
                        t => top.entry(item.bind.clone()).or_default().push(TopBinding::Import(t.clone())),
                    }
                }
            }
            Op::Assign { targets, value } => {
                for t in targets {
                    bind_static(t, value, &mut top);
                }
            }
            Op::AnnAssign { target, value: Some(value) } => bind_static(target, value, &mut top),
            _ => {}
        }
    }

    let mut functions = std::mem::take(&mut pv.functions);
    functions.insert(body, Arc::new(body_def));
    let mut imports = Vec::new();
    for def in functions.values() {
        for node in def.cfg.nodes() {
            if let Op::Import(items) = &node.op {
                for item in items {
                    let source = match &item.target {
                        ImportTarget::Star(_) => Ident::module(name).child(Kind::Var, "*"),
                        _ => scope_var(def, &item.bind),
                    };
                    imports.push(ImportEntry { source, target: item.target.clone(), site: node.site.clone() });
                }
            }
        }
    }

    ModuleFacts {
        name: module,
        is_package,
        functions,
        classes: pv.classes,
        imports,
        top,
        star_imports,
        lambdas: pv.lambdas,
        has_main_guard,
    }
}

fn scope_var(def: &FunctionDef, name: &str) -> Ident {
    if def.is_module_body || def.globals.contains(name) {
        Ident::module(&def.module).child(Kind::Var, name)
    } else {
        def.ident.child(Kind::Var, name)
    }
}

fn bind_static(target: &ast::Expr, value: &ast::Expr, top: &mut BTreeMap<String, Vec<TopBinding>>) {
    match (target, value) {
        (ast::Expr::Name(n), _) => top.entry(n.id.to_string()).or_default().push(TopBinding::Value(value.clone())),
        (ast::Expr::Tuple(t), ast::Expr::Tuple(v)) if t.elts.len() == v.elts.len() => {
            for (t, v) in t.elts.iter().zip(&v.elts) {
                bind_static(t, v, top);
            }
        }
        _ => {}
    }
}

fn is_main_guard(stmt: &ast::Stmt) -> bool {
    let ast::Stmt::If(s) = stmt else { return false };
    let ast::Expr::Compare(c) = &*s.test else { return false };
    let is_name = |e: &ast::Expr| matches!(e, ast::Expr::Name(n) if n.id.as_str() == "__name__");
    let is_main = |e: &ast::Expr| {
        matches!(e, ast::Expr::Constant(k) if matches!(&k.value, ast::Constant::Str(s) if s == "__main__"))
    };
    c.comparators.len() == 1
        && matches!(c.ops[0], ast::CmpOp::Eq)
        && ((is_name(&c.left) && is_main(&c.comparators[0])) || (is_main(&c.left) && is_name(&c.comparators[0])))
}

impl Frame {
    fn new(ident: Ident) -> Self {
        Frame {
            ident,
            locals: BTreeSet::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
            is_generator: false,
        }
    }
}

fn params(args: &ast::Arguments) -> Vec<Param> {
    let mut out = Vec::new();
    let mut push = |a: &ast::Arg, kind, default: Option<&ast::Expr>| {
        out.push(Param { name: a.arg.to_string(), kind, default: default.cloned() });
    };
    for a in &args.posonlyargs {
        push(&a.def, ParamKind::PosOnly, a.default.as_deref());
    }
    for a in &args.args {
        push(&a.def, ParamKind::Normal, a.default.as_deref());
    }
    if let Some(a) = &args.vararg {
        push(a, ParamKind::VarArgs, None);
    }
    for a in &args.kwonlyargs {
        push(&a.def, ParamKind::KwOnly, a.default.as_deref());
    }
    if let Some(a) = &args.kwarg {
        push(a, ParamKind::VarKw, None);
    }
    out
}

fn decorator_name(e: &ast::Expr) -> Option<&str> {
    match e {
        ast::Expr::Name(n) => Some(n.id.as_str()),
        _ => None,
    }
}

impl Previsit<'_> {
    fn frame(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("function frame")
    }

    fn define(&mut self, def: FunctionAst, class: Option<&Ident>) -> Ident {
        let parent_ns = self.ns.last().expect("namespace").clone();
        let ident = parent_ns.child(Kind::Func, &def.name);
        let method = match class {
            None => MethodKind::Function,
            Some(_) => {
                let names: Vec<&str> = def.decorators.iter().filter_map(decorator_name).collect();
                if names.contains(&"staticmethod") {
                    MethodKind::Static
                } else if names.contains(&"classmethod") {
                    MethodKind::Class
                } else {
                    MethodKind::Instance
                }
            }
        };
        let mut defaults = Vec::new();
        for p in def.args.posonlyargs.iter().chain(&def.args.args).chain(&def.args.kwonlyargs) {
            defaults.extend(p.default.as_deref());
        }
        for d in defaults {
            self.expr(d);
        }
        let params = params(&def.args);
        let parent = self.frames.last().map(|f| f.ident.clone());
        let mut frame = Frame::new(ident.clone());
        frame.locals.extend(params.iter().map(|p| p.name.clone()));
        self.frames.push(frame);
        self.ns.push(ident.clone());
        let cfg = CfgBuilder::new(self, def.offset).build(def.body);
        self.ns.pop();
        let frame = self.frames.pop().expect("function frame");
        let fdef = FunctionDef {
            ident: ident.clone(),
            module: self.module.clone(),
            params,
            method,
            class: class.cloned(),
            parent,
            cfg,
            locals: frame.locals,
            globals: frame.globals,
            nonlocals: frame.nonlocals,
            is_generator: frame.is_generator,
            is_module_body: false,
            free: OnceLock::new(),
        };
        if self.functions.insert(ident.clone(), Arc::new(fdef)).is_some() {
            debug!("{ident}: redefined, keeping the later definition");
        }
        ident
    }

    fn lambda(&mut self, lambda: &ast::ExprLambda) {
        let offset = lambda.range.start().to_u32();
        let (line, _) = self.lines.locate(offset);
        let body = vec![ast::Stmt::Return(ast::StmtReturn {
            range: lambda.body.range(),
            value: Some(lambda.body.clone()),
        })];
        let def = FunctionAst {
            name: format!("<lambda>@{line}"),
            args: lambda.args.clone(),
            body,
            decorators: Vec::new(),
            offset,
        };
        let ident = self.define(def, None);
        self.lambdas.insert(offset, ident);
    }
}

impl Lowering for Previsit<'_> {
    fn site(&self, offset: u32, ordinal: u32) -> ExprSite {
        let (line, col) = self.lines.locate(offset);
        ExprSite::new(&self.module, line, col, ordinal)
    }

    fn function(&mut self, def: FunctionAst) -> Ident {
        self.define(def, None)
    }

    fn class(&mut self, def: ast::StmtClassDef) -> ClassOp {
        let parent_ns = self.ns.last().expect("namespace").clone();
        let ident = parent_ns.child(Kind::Cls, def.name.as_str());
        self.ns.push(ident.clone());
        let mut methods = Vec::new();
        let mut method_map = BTreeMap::new();
        let mut attrs = Vec::new();
        let mut nested = BTreeMap::new();
        for stmt in def.body {
            let offset = stmt.start().to_u32();
            match stmt {
                ast::Stmt::FunctionDef(f) => {
                    let fa = FunctionAst {
                        name: f.name.to_string(),
                        args: f.args,
                        body: f.body,
                        decorators: f.decorator_list,
                        offset,
                    };
                    self.method(fa, &ident, &mut methods, &mut method_map);
                }
                ast::Stmt::AsyncFunctionDef(f) => {
                    let fa = FunctionAst {
                        name: f.name.to_string(),
                        args: f.args,
                        body: f.body,
                        decorators: f.decorator_list,
                        offset,
                    };
                    self.method(fa, &ident, &mut methods, &mut method_map);
                }
                ast::Stmt::ClassDef(c) => {
                    let name = c.name.to_string();
                    for e in c.bases.iter().chain(&c.decorator_list) {
                        self.expr(e);
                    }
                    let inner = self.class(c);
                    nested.insert(name, inner.class);
                }
                ast::Stmt::Assign(a) => {
                    self.expr(&a.value);
                    for t in &a.targets {
                        if let ast::Expr::Name(n) = t {
                            attrs.push((n.id.to_string(), (*a.value).clone()));
                        }
                    }
                }
                ast::Stmt::AnnAssign(a) => {
                    if let (ast::Expr::Name(n), Some(v)) = (&*a.target, &a.value) {
                        self.expr(v);
                        attrs.push((n.id.to_string(), (**v).clone()));
                    }
                }
                _ => {}
            }
        }
        self.ns.pop();
        let cdef = ClassDef {
            ident: ident.clone(),
            module: self.module.clone(),
            bases: def.bases.clone(),
            methods: method_map,
            attrs: attrs.clone(),
            nested,
            resolved_bases: OnceLock::new(),
            mro: OnceLock::new(),
        };
        self.classes.insert(ident.clone(), Arc::new(cdef));
        ClassOp {
            class: ident,
            name: def.name.to_string(),
            bases: def.bases,
            decorators: def.decorator_list,
            methods,
            attrs,
        }
    }

    fn import(&mut self, stmt: &ast::Stmt) -> Vec<ImportItem> {
        let mut items = Vec::new();
        match stmt {
            ast::Stmt::Import(i) => {
                for alias in &i.names {
                    let full = alias.name.to_string();
                    let item = match &alias.asname {
                        Some(a) => ImportItem { bind: a.to_string(), target: ImportTarget::Module(full) },
                        None => {
                            let head = full.split('.').next().unwrap_or(&full).to_string();
                            ImportItem { bind: head.clone(), target: ImportTarget::Module(head) }
                        }
                    };
                    items.push(item);
                }
            }
            ast::Stmt::ImportFrom(i) => {
                let level = i.level.map(|l| l.to_u32()).unwrap_or(0);
                let module = self.absolute(i.module.as_ref().map(|m| m.as_str()), level);
                for alias in &i.names {
                    let name = alias.name.to_string();
                    if name == "*" {
                        items.push(ImportItem { bind: "*".into(), target: ImportTarget::Star(module.clone()) });
                        continue;
                    }
                    let bind = alias.asname.as_ref().map(|a| a.to_string()).unwrap_or_else(|| name.clone());
                    items.push(ImportItem { bind, target: ImportTarget::Member { module: module.clone(), name } });
                }
            }
            _ => {}
        }
        items
    }

    fn expr(&mut self, e: &ast::Expr) {
        let mut lambdas = Vec::new();
        let mut generator = false;
        let mut bound = Vec::new();
        walk::walk(e, &mut |x| match x {
            ast::Expr::Lambda(l) => lambdas.push(l),
            ast::Expr::Yield(_) | ast::Expr::YieldFrom(_) => generator = true,
            ast::Expr::NamedExpr(n) => {
                if let ast::Expr::Name(t) = &*n.target {
                    bound.push(t.id.to_string());
                }
            }
            _ => {}
        });
        if generator {
            self.frame().is_generator = true;
        }
        for name in bound {
            self.bind(&name);
        }
        for l in lambdas {
            self.lambda(l);
        }
    }

    fn bind(&mut self, name: &str) {
        self.frame().locals.insert(name.to_string());
    }

    fn declare(&mut self, names: &[ast::Identifier], global: bool) {
        let frame = self.frame();
        for n in names {
            if global {
                frame.globals.insert(n.to_string());
            } else {
                frame.nonlocals.insert(n.to_string());
            }
        }
    }
}

impl Previsit<'_> {
    fn method(
        &mut self,
        fa: FunctionAst,
        class: &Ident,
        methods: &mut Vec<(Ident, Vec<ast::Expr>)>,
        map: &mut BTreeMap<String, Ident>,
    ) {
        for d in &fa.decorators {
            self.expr(d);
        }
        let decorators = fa.decorators.clone();
        let name = fa.name.clone();
        let m = self.define(fa, Some(class));
        map.insert(name, m.clone());
        methods.push((m, decorators));
    }

    /// Absolute module name for a possibly relative `from` import.
    fn absolute(&self, module: Option<&str>, level: u32) -> String {
        if level == 0 {
            return module.unwrap_or_default().to_string();
        }
        let mut parts: Vec<&str> = self.module.split('.').collect();
        if !self.is_package {
            parts.pop();
        }
        for _ in 1..level {
            parts.pop();
        }
        if let Some(m) = module {
            parts.push(m);
        }
        parts.join(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_source;

    fn facts(src: &str) -> ModuleFacts {
        previsit("m", false, parse_source("m", src).unwrap())
    }

    #[test]
    fn records_functions_with_parameters() {
        let f = facts("def f(a, b=1, *rest, k, **kw):\n    pass\n");
        let def = &f.functions[&Ident::module("m").child(Kind::Func, "f")];
        assert_eq!(def.param_names(), ["a", "b", "rest", "k", "kw"]);
        assert!(def.is_local("a"));
    }

    #[test]
    fn methods_nest_under_their_class() {
        let f = facts("class K:\n    x = 1\n    @staticmethod\n    def s(): pass\n    def m(self): pass\n");
        let k = Ident::module("m").child(Kind::Cls, "K");
        let class = &f.classes[&k];
        assert_eq!(class.methods.len(), 2);
        assert_eq!(f.functions[&k.child(Kind::Func, "s")].method, MethodKind::Static);
        assert_eq!(f.functions[&k.child(Kind::Func, "m")].method, MethodKind::Instance);
        assert_eq!(class.attrs[0].0, "x");
    }

    #[test]
    fn nested_functions_and_lambdas() {
        let f = facts("def outer():\n    def inner(): pass\n    g = lambda x: x\n");
        let outer = Ident::module("m").child(Kind::Func, "outer");
        let inner = &f.functions[&outer.child(Kind::Func, "inner")];
        assert_eq!(inner.parent, Some(outer.clone()));
        assert!(f.functions.contains_key(&outer.child(Kind::Func, "<lambda>@3")));
        assert_eq!(f.lambdas.len(), 1);
    }

    #[test]
    fn relative_imports_resolve_against_the_package() {
        let parsed = parse_source("pkg.sub.mod", "from . import a\nfrom ..b import c\n").unwrap();
        let f = previsit("pkg.sub.mod", false, parsed);
        let targets: Vec<_> = f.imports.iter().map(|i| i.target.clone()).collect();
        assert_eq!(
            targets,
            [
                ImportTarget::Member { module: "pkg.sub".into(), name: "a".into() },
                ImportTarget::Member { module: "pkg.b".into(), name: "c".into() },
            ]
        );
    }

    #[test]
    fn import_entry_uses_the_statement_site() {
        let f = facts("import os\n\nfrom m2 import g\n");
        let entry = &f.imports[1];
        assert_eq!(entry.source.dotted(), "m.g");
        assert_eq!(entry.site.to_string(), "m:3:0");
    }

    #[test]
    fn generators_globals_and_main_guard() {
        let f = facts("def g():\n    global X\n    X = 1\n    yield 1\nif __name__ == '__main__':\n    g()\n");
        let g = &f.functions[&Ident::module("m").child(Kind::Func, "g")];
        assert!(g.is_generator);
        assert!(!g.is_local("X"));
        assert!(f.has_main_guard);
    }

    #[test]
    fn previsit_is_deterministic() {
        let src = "class A:\n    def f(self): pass\ndef g(): pass\n";
        let (a, b) = (facts(src), facts(src));
        assert_eq!(a.functions.keys().collect::<Vec<_>>(), b.functions.keys().collect::<Vec<_>>());
        assert_eq!(a.classes.keys().collect::<Vec<_>>(), b.classes.keys().collect::<Vec<_>>());
    }
}
