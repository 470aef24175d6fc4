//! Intra-procedural analysis: one pass over a function's CFG in node order,
//! threading an FTG through every statement.

use crate::facts::ident::{Ident, Kind};
use crate::facts::summary::FunctionDef;
use crate::ftg::{latest, Ftg, Relation};
use crate::inter::Session;
use rustpython_parser::ast::{Constant, Expr};

use crate::source::cfg::{EdgeKind, Op};
use crate::transfer::{apply_transfer_rule, FREE_PREFIX};

pub use crate::transfer::compute_param_types;

/// A variable owned by some function frame: a local, a parameter, or a
/// scratch slot. Captured-variable fields under a function value and return
/// slots are not locals.
pub fn is_local(src: &Ident) -> bool {
    src.kind() == Kind::Var
        && !src.is_ret()
        && !src.name().starts_with(FREE_PREFIX)
        && src.parent().is_some_and(|p| p.kind() == Kind::Func)
}

fn is_param(def: &FunctionDef, src: &Ident) -> bool {
    src.parent().as_ref() == Some(&def.ident) && def.params.iter().any(|p| p.name == src.name())
}

/// Walks `def` from `g_in` and returns FTG_R, the graph flowing into the
/// exit node.
///
/// Nodes are visited in preorder, which is also their index order, so every
/// forward predecessor is done before its successor. A node with one parent
/// works on a copy of that parent's graph; a join merges its parents first.
/// Loop bodies are visited once: the loop exit merges the header's graph
/// with the graphs at the ends of the body.
pub fn walk(sess: &mut Session<'_>, def: &FunctionDef, g_in: &Ftg) -> Ftg {
    let cfg = &def.cfg;
    let n = cfg.len();
    let sources: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut out = Vec::new();
            for &(p, kind) in cfg.preds(i) {
                match kind {
                    EdgeKind::Normal => out.push(p),
                    EdgeKind::Back => {}
                    // `while True:` only leaves through `break`.
                    EdgeKind::LoopExit if always_true(&cfg.node(p).op) => {}
                    EdgeKind::LoopExit => {
                        out.push(p);
                        out.extend(cfg.preds(p).iter().filter(|(_, k)| *k == EdgeKind::Back).map(|(b, _)| *b));
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let mut uses = vec![0usize; n];
    for s in sources.iter().flatten() {
        uses[*s] += 1;
    }

    let mut after: Vec<Option<Ftg>> = vec![None; n];
    after[cfg.entry()] = Some(g_in.clone());
    let exit = cfg.exit();
    for i in 0..n {
        if i == cfg.entry() {
            continue;
        }
        let mut g = match sources[i].as_slice() {
            [] => Ftg::new(),
            [one] if uses[*one] == 1 => after[*one].take().unwrap_or_default(),
            [one] => after[*one].clone().unwrap_or_default(),
            many => {
                let live: Vec<&Ftg> = many.iter().filter_map(|s| after[*s].as_ref()).collect();
                if live.is_empty() {
                    Ftg::new()
                } else {
                    Ftg::merge(live)
                }
            }
        };
        for s in &sources[i] {
            uses[*s] -= 1;
            if uses[*s] == 0 {
                after[*s] = None;
            }
        }
        if i == exit {
            return g;
        }
        sess.stats.rule_applications += 1;
        apply_transfer_rule(sess, def, i, &mut g);
        if uses[i] > 0 {
            after[i] = Some(g);
        }
    }
    Ftg::new()
}

fn always_true(op: &Op) -> bool {
    let Op::Test(Expr::Constant(c)) = op else { return false };
    match &c.value {
        Constant::Bool(b) => *b,
        Constant::Int(i) => *i != 0u32.into(),
        _ => false,
    }
}

/// FTG_out: what survives the call. Locals go, parameters and everything
/// reachable from outside keep only their latest relations, and return
/// relations all stay since several yields may feed the result.
pub fn compute_output_ftg(def: &FunctionDef, ftg_r: &Ftg) -> Ftg {
    let mut out = Ftg::new();
    for (src, targets) in ftg_r.entries() {
        if is_local(src) && !is_param(def, src) {
            continue;
        }
        let kept = if src.is_ret() { targets.clone() } else { latest(targets, &def.cfg) };
        for (dst, site) in kept {
            out.insert(Relation::new(src.clone(), dst, site));
        }
    }
    out
}
