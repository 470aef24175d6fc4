//! Binding call arguments to parameters.

use std::collections::BTreeMap;

use crate::facts::summary::{Param, ParamKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgRef {
    Positional(usize),
    Keyword(usize),
    /// Absorbed by `*args` / `**kwargs`, or fed by an unpacked argument.
    Opaque,
}

/// Shape of the arguments at one call site.
#[derive(Debug, Clone, Default)]
pub struct CallShape {
    pub positional: usize,
    /// Index of the first `*expr` argument; positionals after it cannot be
    /// placed.
    pub star_at: Option<usize>,
    /// Keyword names in order; `None` for `**expr`.
    pub keywords: Vec<Option<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    pub map: BTreeMap<String, ArgRef>,
    pub diagnostics: Vec<String>,
}

pub fn kwargs_bind(params: &[Param], shape: &CallShape) -> Binding {
    let mut b = Binding::default();
    let positional: Vec<&Param> =
        params.iter().filter(|p| matches!(p.kind, ParamKind::PosOnly | ParamKind::Normal)).collect();
    let vararg = params.iter().find(|p| p.kind == ParamKind::VarArgs);
    let varkw = params.iter().find(|p| p.kind == ParamKind::VarKw);
    let placeable = shape.star_at.unwrap_or(shape.positional).min(shape.positional);

    for i in 0..placeable {
        match positional.get(i) {
            Some(p) => {
                b.map.insert(p.name.clone(), ArgRef::Positional(i));
            }
            None => match vararg {
                Some(v) => {
                    b.map.insert(v.name.clone(), ArgRef::Opaque);
                }
                None => b.diagnostics.push(format!("too many positional arguments ({})", shape.positional)),
            },
        }
    }
    if shape.star_at.is_some() {
        if let Some(v) = vararg {
            b.map.insert(v.name.clone(), ArgRef::Opaque);
        }
    }

    for (j, kw) in shape.keywords.iter().enumerate() {
        let Some(name) = kw else {
            if let Some(v) = varkw {
                b.map.insert(v.name.clone(), ArgRef::Opaque);
            }
            continue;
        };
        let named = params
            .iter()
            .find(|p| &p.name == name && matches!(p.kind, ParamKind::Normal | ParamKind::KwOnly));
        match named {
            Some(p) if b.map.contains_key(&p.name) => {
                b.diagnostics.push(format!("multiple values for argument `{name}`"));
            }
            Some(p) => {
                b.map.insert(p.name.clone(), ArgRef::Keyword(j));
            }
            None => match varkw {
                Some(v) => {
                    b.map.insert(v.name.clone(), ArgRef::Opaque);
                }
                None => b.diagnostics.push(format!("unexpected keyword argument `{name}`")),
            },
        }
    }

    let unpacked = shape.star_at.is_some() || shape.keywords.iter().any(Option::is_none);
    if !unpacked {
        for p in params {
            let required = matches!(p.kind, ParamKind::PosOnly | ParamKind::Normal | ParamKind::KwOnly);
            if required && p.default.is_none() && !b.map.contains_key(&p.name) {
                b.diagnostics.push(format!("missing argument `{}`", p.name));
            }
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str, kind: ParamKind) -> Param {
        Param { name: name.into(), kind, default: None }
    }

    fn shape(positional: usize, keywords: &[&str]) -> CallShape {
        CallShape { positional, star_at: None, keywords: keywords.iter().map(|k| Some(k.to_string())).collect() }
    }

    #[test]
    fn positional_then_keyword() {
        let params = [p("a", ParamKind::Normal), p("b", ParamKind::Normal)];
        let b = kwargs_bind(&params, &shape(1, &["b"]));
        assert_eq!(b.map["a"], ArgRef::Positional(0));
        assert_eq!(b.map["b"], ArgRef::Keyword(0));
        assert!(b.diagnostics.is_empty());
    }

    #[test]
    fn star_args_absorb_leftovers() {
        let params = [p("a", ParamKind::Normal), p("rest", ParamKind::VarArgs)];
        let b = kwargs_bind(&params, &shape(3, &[]));
        assert_eq!(b.map["a"], ArgRef::Positional(0));
        assert_eq!(b.map["rest"], ArgRef::Opaque);
        assert!(b.diagnostics.is_empty());
    }

    #[test]
    fn unknown_keyword_is_diagnosed_but_others_bind() {
        // The interpreter raises TypeError for f(1, c=2) when f is `def f(a, b=0)`.
        let mut params = vec![p("a", ParamKind::Normal), p("b", ParamKind::Normal)];
        params[1].default = Some(rustpython_parser::ast::Expr::Constant(rustpython_parser::ast::ExprConstant {
            range: Default::default(),
            value: rustpython_parser::ast::Constant::Int(0u32.into()),
            kind: None,
        }));
        let b = kwargs_bind(&params, &shape(1, &["c"]));
        assert_eq!(b.map["a"], ArgRef::Positional(0));
        assert_eq!(b.diagnostics.len(), 1);
        assert!(b.diagnostics[0].contains("unexpected keyword"));
    }

    #[test]
    fn keyword_only_and_double_star() {
        let params = [p("a", ParamKind::Normal), p("k", ParamKind::KwOnly), p("kw", ParamKind::VarKw)];
        let b = kwargs_bind(&params, &shape(1, &["k", "extra"]));
        assert_eq!(b.map["k"], ArgRef::Keyword(0));
        assert_eq!(b.map["kw"], ArgRef::Opaque);
        assert!(b.diagnostics.is_empty());
    }

    #[test]
    fn positional_only_cannot_be_passed_by_name() {
        let params = [p("a", ParamKind::PosOnly)];
        let b = kwargs_bind(&params, &shape(0, &["a"]));
        assert!(!b.map.contains_key("a"));
        assert_eq!(b.diagnostics.len(), 2);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let params = [p("a", ParamKind::Normal)];
        let b = kwargs_bind(&params, &shape(2, &[]));
        assert_eq!(b.map["a"], ArgRef::Positional(0));
        assert_eq!(b.diagnostics.len(), 1);
    }
}
