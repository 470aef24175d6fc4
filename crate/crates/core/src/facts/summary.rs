//! Per-module facts produced by the previsit: the function summary, class
//! summary and import summary, plus the lowered bodies.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use rustpython_parser::ast;

use crate::facts::ident::Ident;
use crate::facts::mro::MroError;
use crate::source::cfg::{Cfg, ImportTarget};
use crate::source::site::ExprSite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    PosOnly,
    Normal,
    VarArgs,
    KwOnly,
    VarKw,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub default: Option<ast::Expr>,
}

/// How a function binds its first parameter when called through a class or
/// an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Function,
    Instance,
    Static,
    Class,
}

#[derive(Debug)]
pub struct FunctionDef {
    pub ident: Ident,
    pub module: Arc<str>,
    pub params: Vec<Param>,
    pub method: MethodKind,
    pub class: Option<Ident>,
    /// Function whose locals this one can see as free variables. `None` for
    /// module bodies.
    pub parent: Option<Ident>,
    pub cfg: Cfg,
    pub locals: BTreeSet<String>,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
    pub is_generator: bool,
    pub is_module_body: bool,
    pub(crate) free: OnceLock<Vec<(String, Ident)>>,
}

impl FunctionDef {
    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn is_local(&self, name: &str) -> bool {
        self.locals.contains(name) && !self.globals.contains(name) && !self.nonlocals.contains(name)
    }
}

#[derive(Debug)]
pub struct ClassDef {
    pub ident: Ident,
    pub module: Arc<str>,
    pub bases: Vec<ast::Expr>,
    pub methods: BTreeMap<String, Ident>,
    pub attrs: Vec<(String, ast::Expr)>,
    pub nested: BTreeMap<String, Ident>,
    pub(crate) resolved_bases: OnceLock<Vec<Ident>>,
    pub(crate) mro: OnceLock<Result<Arc<[Ident]>, MroError>>,
}

#[derive(Debug, Clone)]
pub struct ImportEntry {
    /// Variable bound by the import in the importing scope.
    pub source: Ident,
    pub target: ImportTarget,
    pub site: ExprSite,
}

/// One way a module-level name gets bound.
#[derive(Debug, Clone)]
pub enum TopBinding {
    Func(Ident),
    Class(Ident),
    Import(ImportTarget),
    Value(ast::Expr),
}

#[derive(Debug)]
pub struct ModuleFacts {
    pub name: Arc<str>,
    pub is_package: bool,
    pub functions: BTreeMap<Ident, Arc<FunctionDef>>,
    pub classes: BTreeMap<Ident, Arc<ClassDef>>,
    pub imports: Vec<ImportEntry>,
    pub top: BTreeMap<String, Vec<TopBinding>>,
    pub star_imports: Vec<String>,
    pub lambdas: HashMap<u32, Ident>,
    pub has_main_guard: bool,
}

impl ModuleFacts {
    pub fn body(&self) -> Ident {
        Ident::module_body(&self.name)
    }
}

/// F: function identifier to parameter names.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FunctionSummary {
    pub entries: BTreeMap<Ident, Vec<String>>,
}

/// C: hierarchy as (base, sub) pairs and membership as (class, method).
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ClassSummary {
    pub hier: BTreeSet<(Ident, Ident)>,
    pub incl: BTreeSet<(Ident, Ident)>,
}

/// I: (importing type, imported type, site).
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ImportSummary {
    pub entries: BTreeSet<(Ident, Ident, ExprSite)>,
}
