//! Table of builtin functions, classes and methods on builtin values.

use std::collections::BTreeMap;
use std::path::Path;

use rustpython_parser::ast;

use crate::error::ConfigError;
use crate::facts::ident::{Ident, Kind};

const DEFAULT_TABLE: &str = include_str!("../../data/builtins.tbl");

/// Receiver kind used for names looked up in the builtins scope.
pub const GLOBAL: &str = "global";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltinEntry {
    /// Stub function (or class) under the builtins namespace.
    pub callee: Ident,
    /// Instance produced by the call, if known.
    pub result: Option<Ident>,
    pub is_class: bool,
}

#[derive(Debug, Clone, Default)]
pub struct BuiltinTable {
    entries: BTreeMap<(String, String), BuiltinEntry>,
}

/// Instance of the builtin class `name`, e.g. the value of a string literal.
pub fn instance(name: &str) -> Ident {
    Ident::builtin(Kind::Obj, name)
}

/// Builtin class of a literal or display expression, if it has one.
pub fn literal_class(e: &ast::Expr) -> Option<&'static str> {
    Some(match e {
        ast::Expr::Constant(c) => match &c.value {
            ast::Constant::None => "NoneType",
            ast::Constant::Bool(_) => "bool",
            ast::Constant::Str(_) => "str",
            ast::Constant::Bytes(_) => "bytes",
            ast::Constant::Int(_) => "int",
            ast::Constant::Tuple(_) => "tuple",
            ast::Constant::Float(_) => "float",
            ast::Constant::Complex { .. } => "complex",
            ast::Constant::Ellipsis => "ellipsis",
        },
        ast::Expr::JoinedStr(_) => "str",
        ast::Expr::List(_) | ast::Expr::ListComp(_) => "list",
        ast::Expr::Tuple(_) => "tuple",
        ast::Expr::Dict(_) | ast::Expr::DictComp(_) => "dict",
        ast::Expr::Set(_) | ast::Expr::SetComp(_) => "set",
        ast::Expr::GeneratorExp(_) => "generator",
        _ => return None,
    })
}

impl BuiltinTable {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || ConfigError::BuiltinTable { line: i + 1, text: raw.to_string() };
            let (lhs, rhs) = line.split_once("->").ok_or_else(bad)?;
            let (receiver, method) = lhs.trim().split_once('.').ok_or_else(bad)?;
            let (target, result) = match rhs.split_once("=>") {
                Some((t, r)) => (t.trim(), Some(r.trim())),
                None => (rhs.trim(), None),
            };
            let name = target.strip_prefix("builtins.").ok_or_else(bad)?;
            if receiver.is_empty() || method.is_empty() || name.is_empty() || result == Some("") {
                return Err(bad());
            }
            let is_class = result == Some("class");
            let entry = BuiltinEntry {
                callee: Ident::builtin(if is_class { Kind::Cls } else { Kind::Func }, name),
                result: match result {
                    Some("class") => Some(instance(name)),
                    Some(kind) => Some(instance(kind)),
                    None => None,
                },
                is_class,
            };
            entries.insert((receiver.to_string(), method.to_string()), entry);
        }
        Ok(BuiltinTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn global(&self, name: &str) -> Option<&BuiltinEntry> {
        self.method(GLOBAL, name)
    }

    pub fn method(&self, receiver: &str, name: &str) -> Option<&BuiltinEntry> {
        self.entries.get(&(receiver.to_string(), name.to_string()))
    }

    /// Entry for calling `name` on a builtin instance.
    pub fn on_instance(&self, receiver: &Ident, name: &str) -> Option<&BuiltinEntry> {
        if receiver.is_builtin() && receiver.kind() == Kind::Obj {
            self.method(receiver.name(), name)
        } else {
            None
        }
    }

    /// Builtin class by name, for base-class and exception resolution.
    pub fn class(&self, name: &str) -> Option<&Ident> {
        self.global(name).filter(|e| e.is_class).map(|e| &e.callee)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl BuiltinTable {
    pub fn standard() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped builtin table parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_loads() {
        let t = BuiltinTable::standard();
        let split = t.method("str", "split").unwrap();
        assert_eq!(split.callee.dotted(), "builtins.split");
        assert_eq!(split.result, Some(instance("list")));
        assert!(t.global("list").unwrap().is_class);
        assert_eq!(t.global("open").unwrap().result, Some(instance("file")));
    }

    #[test]
    fn string_literal_receiver() {
        let t = BuiltinTable::standard();
        let e = t.on_instance(&instance("str"), "split").unwrap();
        assert_eq!(e.callee.to_string(), "builtins.split");
        assert!(t.on_instance(&Ident::module("m").child(Kind::Obj, "K"), "split").is_none());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let err = BuiltinTable::parse("# ok\nstr.split builtins.split\n").unwrap_err();
        assert!(matches!(err, ConfigError::BuiltinTable { line: 2, .. }));
        assert!(BuiltinTable::parse("str.split -> split\n").is_err());
    }
}
