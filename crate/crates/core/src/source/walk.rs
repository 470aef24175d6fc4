//! Child enumeration for expressions.

use rustpython_parser::ast::{self, Expr};

/// Direct sub-expressions of `e` in evaluation order. Lambda bodies are
/// not included: they belong to the lambda's own function.
pub fn children(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    match e {
        Expr::BoolOp(x) => out.extend(&x.values),
        Expr::NamedExpr(x) => out.extend([&*x.value, &*x.target]),
        Expr::BinOp(x) => out.extend([&*x.left, &*x.right]),
        Expr::UnaryOp(x) => out.push(&*x.operand),
        Expr::Lambda(x) => defaults(&x.args, &mut out),
        Expr::IfExp(x) => out.extend([&*x.test, &*x.body, &*x.orelse]),
        Expr::Dict(x) => {
            for (k, v) in x.keys.iter().zip(&x.values) {
                out.extend(k.as_ref());
                out.push(v);
            }
        }
        Expr::Set(x) => out.extend(&x.elts),
        Expr::ListComp(x) => comprehension(&x.generators, [&*x.elt], &mut out),
        Expr::SetComp(x) => comprehension(&x.generators, [&*x.elt], &mut out),
        Expr::GeneratorExp(x) => comprehension(&x.generators, [&*x.elt], &mut out),
        Expr::DictComp(x) => comprehension(&x.generators, [&*x.key, &*x.value], &mut out),
        Expr::Await(x) => out.push(&*x.value),
        Expr::Yield(x) => out.extend(x.value.as_deref()),
        Expr::YieldFrom(x) => out.push(&*x.value),
        Expr::Compare(x) => {
            out.push(&*x.left);
            out.extend(&x.comparators);
        }
        Expr::Call(x) => {
            out.push(&*x.func);
            out.extend(&x.args);
            out.extend(x.keywords.iter().map(|k| &k.value));
        }
        Expr::FormattedValue(x) => {
            out.push(&*x.value);
            out.extend(x.format_spec.as_deref());
        }
        Expr::JoinedStr(x) => out.extend(&x.values),
        Expr::Constant(_) | Expr::Name(_) => {}
        Expr::Attribute(x) => out.push(&*x.value),
        Expr::Subscript(x) => out.extend([&*x.value, &*x.slice]),
        Expr::Starred(x) => out.push(&*x.value),
        Expr::List(x) => out.extend(&x.elts),
        Expr::Tuple(x) => out.extend(&x.elts),
        Expr::Slice(x) => {
            out.extend(x.lower.as_deref());
            out.extend(x.upper.as_deref());
            out.extend(x.step.as_deref());
        }
    }
    out
}

fn defaults<'a>(args: &'a ast::Arguments, out: &mut Vec<&'a Expr>) {
    for a in args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs) {
        out.extend(a.default.as_deref());
    }
}

fn comprehension<'a, const N: usize>(gens: &'a [ast::Comprehension], elts: [&'a Expr; N], out: &mut Vec<&'a Expr>) {
    for g in gens {
        out.push(&g.iter);
        out.push(&g.target);
        out.extend(&g.ifs);
    }
    out.extend(elts);
}

/// Preorder walk over `e` and its descendants.
pub fn walk<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    for c in children(e) {
        walk(c, f);
    }
}
