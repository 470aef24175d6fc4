//! Statement-level control-flow graphs.
//!
//! Nodes are created in AST preorder, so a node's index is its ordinal. Node
//! 0 is the entry and the last node is the virtual exit that every return
//! site flows into. Sub-expressions share their statement's node.

use std::collections::VecDeque;

use rustpython_parser::ast::{self, Ranged};

use crate::facts::ident::Ident;
use crate::source::site::ExprSite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Normal,
    /// Loop body end (or `continue`) back to the loop header.
    Back,
    /// Loop header to the first statement after the loop.
    LoopExit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportTarget {
    Module(String),
    Member { module: String, name: String },
    Star(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportItem {
    pub bind: String,
    pub target: ImportTarget,
}

#[derive(Debug, Clone)]
pub enum Op {
    Entry,
    Exit,
    Nop,
    Expr(ast::Expr),
    Assign { targets: Vec<ast::Expr>, value: ast::Expr },
    AugAssign { target: ast::Expr, value: ast::Expr },
    AnnAssign { target: ast::Expr, value: Option<ast::Expr> },
    Return(Option<ast::Expr>),
    Raise(Option<ast::Expr>),
    Delete(Vec<ast::Expr>),
    Import(Vec<ImportItem>),
    Def { func: Ident, name: String, decorators: Vec<ast::Expr> },
    Class(Box<ClassOp>),
    Test(ast::Expr),
    ForHeader { target: ast::Expr, iter: ast::Expr },
    WithEnter { context: ast::Expr, target: Option<ast::Expr>, slot: String },
    WithExit { slot: String },
    Handler { kind: Option<ast::Expr>, name: Option<String> },
}

impl Op {
    pub fn is_return_like(&self) -> bool {
        matches!(self, Op::Return(_) | Op::Raise(_))
    }

    /// Top-level expressions held by the node.
    pub fn exprs(&self) -> Vec<&ast::Expr> {
        match self {
            Op::Entry | Op::Exit | Op::Nop | Op::Import(_) | Op::WithExit { .. } => Vec::new(),
            Op::Expr(e) | Op::Test(e) => vec![e],
            Op::Assign { targets, value } => targets.iter().chain(std::iter::once(value)).collect(),
            Op::AugAssign { target, value } => vec![target, value],
            Op::AnnAssign { target, value } => std::iter::once(target).chain(value).collect(),
            Op::Return(v) | Op::Raise(v) => v.iter().collect(),
            Op::Delete(ts) => ts.iter().collect(),
            Op::Def { decorators, .. } => decorators.iter().collect(),
            Op::Class(c) => c
                .bases
                .iter()
                .chain(&c.decorators)
                .chain(c.methods.iter().flat_map(|(_, d)| d))
                .chain(c.attrs.iter().map(|(_, e)| e))
                .collect(),
            Op::ForHeader { target, iter } => vec![target, iter],
            Op::WithEnter { context, target, .. } => std::iter::once(context).chain(target).collect(),
            Op::Handler { kind, .. } => kind.iter().collect(),
        }
    }
}

/// A class statement: the class body's methods and simple attribute
/// assignments are folded into the single node for the `class` line.
#[derive(Debug, Clone)]
pub struct ClassOp {
    pub class: Ident,
    pub name: String,
    pub bases: Vec<ast::Expr>,
    pub decorators: Vec<ast::Expr>,
    pub methods: Vec<(Ident, Vec<ast::Expr>)>,
    pub attrs: Vec<(String, ast::Expr)>,
}

#[derive(Debug, Clone)]
pub struct CfgNode {
    pub site: ExprSite,
    pub op: Op,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    nodes: Vec<CfgNode>,
    succ: Vec<Vec<(usize, EdgeKind)>>,
    pred: Vec<Vec<(usize, EdgeKind)>>,
}

impl Cfg {
    pub fn entry(&self) -> usize {
        0
    }

    pub fn exit(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &CfgNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[CfgNode] {
        &self.nodes
    }

    pub fn succs(&self, id: usize) -> &[(usize, EdgeKind)] {
        &self.succ[id]
    }

    pub fn preds(&self, id: usize) -> &[(usize, EdgeKind)] {
        &self.pred[id]
    }

    /// Return sites: explicit returns, raises and implicit fall-off points,
    /// i.e. every predecessor of the virtual exit.
    pub fn returns(&self) -> Vec<usize> {
        self.pred[self.exit()].iter().map(|&(p, _)| p).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        self.succ.iter().enumerate().flat_map(|(a, out)| out.iter().map(move |&(b, k)| (a, b, k)))
    }

    /// Node index for a site of this graph, if it is one.
    pub fn node_of(&self, site: &ExprSite) -> Option<usize> {
        let id = site.ordinal as usize;
        (id < self.nodes.len() && self.nodes[id].site == *site).then_some(id)
    }

    /// True if a non-empty path leads from `a` to `b`.
    pub fn reaches(&self, a: usize, b: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = self.succ[a].iter().map(|&(s, _)| s).collect();
        while let Some(n) = queue.pop_front() {
            if n == b {
                return true;
            }
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            queue.extend(self.succ[n].iter().map(|&(s, _)| s));
        }
        false
    }

    pub fn reachable_from_entry(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &(s, _) in &self.succ[n] {
                if !std::mem::replace(&mut seen[s], true) {
                    queue.push_back(s);
                }
            }
        }
        seen
    }
}

/// Callbacks the builder needs from whoever owns the enclosing scope:
/// site construction, registration of nested definitions, name binding.
pub trait Lowering {
    fn site(&self, offset: u32, ordinal: u32) -> ExprSite;
    fn function(&mut self, def: FunctionAst) -> Ident;
    fn class(&mut self, def: ast::StmtClassDef) -> ClassOp;
    fn import(&mut self, stmt: &ast::Stmt) -> Vec<ImportItem>;
    /// Called once for every expression that ends up inside a node.
    fn expr(&mut self, expr: &ast::Expr);
    fn bind(&mut self, name: &str);
    fn declare(&mut self, names: &[ast::Identifier], global: bool);
}

/// A function definition handed to [`Lowering::function`].
#[derive(Debug)]
pub struct FunctionAst {
    pub name: String,
    pub args: Box<ast::Arguments>,
    pub body: Vec<ast::Stmt>,
    pub decorators: Vec<ast::Expr>,
    pub offset: u32,
}

type Pred = (usize, EdgeKind);

struct LoopFrame {
    header: usize,
    breaks: Vec<usize>,
}

pub struct CfgBuilder<'h, H: Lowering> {
    hook: &'h mut H,
    nodes: Vec<CfgNode>,
    succ: Vec<Vec<Pred>>,
    pred: Vec<Vec<Pred>>,
    loops: Vec<LoopFrame>,
    returns: Vec<usize>,
    entry_offset: u32,
    with_slots: u32,
}

impl<'h, H: Lowering> CfgBuilder<'h, H> {
    pub fn new(hook: &'h mut H, entry_offset: u32) -> Self {
        let mut b = CfgBuilder {
            hook,
            nodes: Vec::new(),
            succ: Vec::new(),
            pred: Vec::new(),
            loops: Vec::new(),
            returns: Vec::new(),
            entry_offset,
            with_slots: 0,
        };
        b.node(entry_offset, Op::Entry, &[]);
        b
    }

    pub fn hook(&mut self) -> &mut H {
        self.hook
    }

    /// Lowers a function or module body and closes the graph.
    pub fn build(mut self, body: Vec<ast::Stmt>) -> Cfg {
        let dangling = self.block(body, vec![(0, EdgeKind::Normal)]);
        let exit = self.node(self.entry_offset, Op::Exit, &dangling);
        for r in std::mem::take(&mut self.returns) {
            self.edge(r, exit, EdgeKind::Normal);
        }
        Cfg { nodes: self.nodes, succ: self.succ, pred: self.pred }
    }

    fn node(&mut self, offset: u32, op: Op, preds: &[Pred]) -> usize {
        let id = self.nodes.len();
        let site = self.hook.site(offset, id as u32);
        self.nodes.push(CfgNode { site, op });
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        for &(p, kind) in preds {
            self.edge(p, id, kind);
        }
        id
    }

    fn edge(&mut self, from: usize, to: usize, kind: EdgeKind) {
        if !self.succ[from].contains(&(to, kind)) {
            self.succ[from].push((to, kind));
            self.pred[to].push((from, kind));
        }
    }

    fn exprs<'e>(&mut self, exprs: impl IntoIterator<Item = &'e ast::Expr>) {
        for e in exprs {
            self.hook.expr(e);
        }
    }

    fn bind_target(&mut self, target: &ast::Expr) {
        match target {
            ast::Expr::Name(n) => self.hook.bind(n.id.as_str()),
            ast::Expr::Tuple(t) => t.elts.iter().for_each(|e| self.bind_target(e)),
            ast::Expr::List(l) => l.elts.iter().for_each(|e| self.bind_target(e)),
            ast::Expr::Starred(s) => self.bind_target(&s.value),
            _ => {}
        }
    }

    pub fn block(&mut self, stmts: Vec<ast::Stmt>, mut preds: Vec<Pred>) -> Vec<Pred> {
        let mut stmts = stmts.into_iter();
        while let Some(stmt) = stmts.next() {
            if preds.is_empty() {
                // Unreachable tail: lower it into a throwaway graph so nested
                // definitions are still registered.
                let rest: Vec<ast::Stmt> = std::iter::once(stmt).chain(stmts).collect();
                let offset = rest[0].start().to_u32();
                CfgBuilder::new(&mut *self.hook, offset).build(rest);
                break;
            }
            preds = self.stmt(stmt, preds);
        }
        preds
    }

    fn stmt(&mut self, stmt: ast::Stmt, preds: Vec<Pred>) -> Vec<Pred> {
        use ast::Stmt as S;
        let offset = stmt.start().to_u32();
        match stmt {
            S::FunctionDef(f) => {
                let def = FunctionAst {
                    name: f.name.to_string(),
                    args: f.args,
                    body: f.body,
                    decorators: f.decorator_list,
                    offset,
                };
                self.def(def, preds)
            }
            S::AsyncFunctionDef(f) => {
                let def = FunctionAst {
                    name: f.name.to_string(),
                    args: f.args,
                    body: f.body,
                    decorators: f.decorator_list,
                    offset,
                };
                self.def(def, preds)
            }
            S::ClassDef(c) => {
                let name = c.name.to_string();
                self.exprs(c.bases.iter().chain(&c.decorator_list));
                let op = Op::Class(Box::new(self.hook.class(c)));
                self.hook.bind(&name);
                vec![(self.node(offset, op, &preds), EdgeKind::Normal)]
            }
            S::Return(r) => {
                self.exprs(r.value.as_deref());
                let id = self.node(offset, Op::Return(r.value.map(|v| *v)), &preds);
                self.returns.push(id);
                Vec::new()
            }
            S::Raise(r) => {
                self.exprs(r.exc.as_deref().into_iter().chain(r.cause.as_deref()));
                let id = self.node(offset, Op::Raise(r.exc.map(|v| *v)), &preds);
                self.returns.push(id);
                Vec::new()
            }
            S::Delete(d) => {
                d.targets.iter().for_each(|t| self.bind_target(t));
                vec![(self.node(offset, Op::Delete(d.targets), &preds), EdgeKind::Normal)]
            }
            S::Assign(a) => {
                a.targets.iter().for_each(|t| self.bind_target(t));
                self.exprs(a.targets.iter().chain(std::iter::once(&*a.value)));
                let op = Op::Assign { targets: a.targets, value: *a.value };
                vec![(self.node(offset, op, &preds), EdgeKind::Normal)]
            }
            S::TypeAlias(_) => vec![(self.node(offset, Op::Nop, &preds), EdgeKind::Normal)],
            S::AugAssign(a) => {
                self.bind_target(&a.target);
                self.exprs([&*a.target, &*a.value]);
                let op = Op::AugAssign { target: *a.target, value: *a.value };
                vec![(self.node(offset, op, &preds), EdgeKind::Normal)]
            }
            S::AnnAssign(a) => {
                if a.value.is_some() {
                    self.bind_target(&a.target);
                }
                self.exprs(std::iter::once(&*a.target).chain(a.value.as_deref()));
                let op = Op::AnnAssign { target: *a.target, value: a.value.map(|v| *v) };
                vec![(self.node(offset, op, &preds), EdgeKind::Normal)]
            }
            S::For(f) => self.for_loop(offset, *f.target, *f.iter, f.body, f.orelse, preds),
            S::AsyncFor(f) => self.for_loop(offset, *f.target, *f.iter, f.body, f.orelse, preds),
            S::While(w) => {
                self.exprs([&*w.test]);
                let header = self.node(offset, Op::Test(*w.test), &preds);
                self.loop_body(header, w.body, w.orelse)
            }
            S::If(i) => {
                self.exprs([&*i.test]);
                let test = self.node(offset, Op::Test(*i.test), &preds);
                let mut exits = self.block(i.body, vec![(test, EdgeKind::Normal)]);
                exits.extend(self.block(i.orelse, vec![(test, EdgeKind::Normal)]));
                exits
            }
            S::With(w) => self.with(offset, w.items, w.body, preds),
            S::AsyncWith(w) => self.with(offset, w.items, w.body, preds),
            S::Match(m) => {
                self.exprs([&*m.subject]);
                let test = self.node(offset, Op::Test(*m.subject), &preds);
                let mut exits = vec![(test, EdgeKind::Normal)];
                for case in m.cases {
                    self.exprs(case.guard.as_deref());
                    exits.extend(self.block(case.body, vec![(test, EdgeKind::Normal)]));
                }
                exits
            }
            S::Try(t) => self.try_block(offset, t.body, t.handlers, t.orelse, t.finalbody, preds),
            S::TryStar(t) => self.try_block(offset, t.body, t.handlers, t.orelse, t.finalbody, preds),
            S::Assert(a) => {
                self.exprs(std::iter::once(&*a.test).chain(a.msg.as_deref()));
                vec![(self.node(offset, Op::Test(*a.test), &preds), EdgeKind::Normal)]
            }
            S::Import(_) | S::ImportFrom(_) => {
                let items = self.hook.import(&stmt);
                for item in &items {
                    if !matches!(item.target, ImportTarget::Star(_)) {
                        self.hook.bind(&item.bind);
                    }
                }
                vec![(self.node(offset, Op::Import(items), &preds), EdgeKind::Normal)]
            }
            S::Global(g) => {
                self.hook.declare(&g.names, true);
                preds
            }
            S::Nonlocal(n) => {
                self.hook.declare(&n.names, false);
                preds
            }
            S::Expr(e) => {
                self.exprs([&*e.value]);
                vec![(self.node(offset, Op::Expr(*e.value), &preds), EdgeKind::Normal)]
            }
            S::Pass(_) => vec![(self.node(offset, Op::Nop, &preds), EdgeKind::Normal)],
            S::Break(_) => {
                let id = self.node(offset, Op::Nop, &preds);
                if let Some(frame) = self.loops.last_mut() {
                    frame.breaks.push(id);
                }
                Vec::new()
            }
            S::Continue(_) => {
                let id = self.node(offset, Op::Nop, &preds);
                if let Some(header) = self.loops.last().map(|f| f.header) {
                    self.edge(id, header, EdgeKind::Back);
                }
                Vec::new()
            }
        }
    }

    fn def(&mut self, def: FunctionAst, preds: Vec<Pred>) -> Vec<Pred> {
        let offset = def.offset;
        let name = def.name.clone();
        let decorators = def.decorators.clone();
        self.exprs(&decorators);
        let func = self.hook.function(def);
        self.hook.bind(&name);
        let op = Op::Def { func, name, decorators };
        vec![(self.node(offset, op, &preds), EdgeKind::Normal)]
    }

    fn for_loop(
        &mut self,
        offset: u32,
        target: ast::Expr,
        iter: ast::Expr,
        body: Vec<ast::Stmt>,
        orelse: Vec<ast::Stmt>,
        preds: Vec<Pred>,
    ) -> Vec<Pred> {
        self.bind_target(&target);
        self.exprs([&target, &iter]);
        let header = self.node(offset, Op::ForHeader { target, iter }, &preds);
        self.loop_body(header, body, orelse)
    }

    fn loop_body(&mut self, header: usize, body: Vec<ast::Stmt>, orelse: Vec<ast::Stmt>) -> Vec<Pred> {
        self.loops.push(LoopFrame { header, breaks: Vec::new() });
        let body_exits = self.block(body, vec![(header, EdgeKind::Normal)]);
        for (p, _) in body_exits {
            self.edge(p, header, EdgeKind::Back);
        }
        let frame = self.loops.pop().expect("loop frame");
        let mut exits = self.block(orelse, vec![(header, EdgeKind::LoopExit)]);
        exits.extend(frame.breaks.into_iter().map(|b| (b, EdgeKind::Normal)));
        exits
    }

    fn with(&mut self, offset: u32, items: Vec<ast::WithItem>, body: Vec<ast::Stmt>, mut preds: Vec<Pred>) -> Vec<Pred> {
        let mut slots = Vec::new();
        let mut last_enter = None;
        for item in items {
            if let Some(t) = item.optional_vars.as_deref() {
                self.bind_target(t);
            }
            self.exprs(std::iter::once(&item.context_expr).chain(item.optional_vars.as_deref()));
            let slot = format!("<with#{}>", self.with_slots);
            self.with_slots += 1;
            let op = Op::WithEnter {
                context: item.context_expr,
                target: item.optional_vars.map(|v| *v),
                slot: slot.clone(),
            };
            let id = self.node(offset, op, &preds);
            preds = vec![(id, EdgeKind::Normal)];
            slots.push(slot);
            last_enter = Some(id);
        }
        let mut exits = self.block(body, preds);
        if let Some(enter) = last_enter {
            exits.push((enter, EdgeKind::Normal));
        }
        for slot in slots.into_iter().rev() {
            let id = self.node(offset, Op::WithExit { slot }, &exits);
            exits = vec![(id, EdgeKind::Normal)];
        }
        exits
    }

    fn try_block(
        &mut self,
        offset: u32,
        body: Vec<ast::Stmt>,
        handlers: Vec<ast::ExceptHandler>,
        orelse: Vec<ast::Stmt>,
        finalbody: Vec<ast::Stmt>,
        preds: Vec<Pred>,
    ) -> Vec<Pred> {
        let head = self.node(offset, Op::Nop, &preds);
        let body_exits = self.block(body, vec![(head, EdgeKind::Normal)]);
        let mut join = self.block(orelse, body_exits);
        for handler in handlers {
            let ast::ExceptHandler::ExceptHandler(h) = handler;
            let h_offset = h.range.start().to_u32();
            self.exprs(h.type_.as_deref());
            let name = h.name.map(|n| n.to_string());
            if let Some(n) = &name {
                self.hook.bind(n);
            }
            let op = Op::Handler { kind: h.type_.map(|t| *t), name };
            let id = self.node(h_offset, op, &[(head, EdgeKind::Normal)]);
            join.extend(self.block(h.body, vec![(id, EdgeKind::Normal)]));
        }
        if join.is_empty() && !finalbody.is_empty() {
            // Every path returned; the finally body is still lowered for its
            // definitions but cannot be reached on fall-through.
            let offset = finalbody[0].start().to_u32();
            CfgBuilder::new(&mut *self.hook, offset).build(finalbody);
            return join;
        }
        self.block(finalbody, join)
    }
}
