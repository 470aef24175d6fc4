//! Identifier types: the `(kind, namespace, name)` triple that names every
//! module, class, function and variable the analysis talks about.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Element kind of an identifier.
///
/// `Obj` is an instance of a class. It shares the namespace and name of its
/// class so that method lookup can go through the class summary, but it is a
/// distinct pointee: calling a method through an `Obj` binds the receiver,
/// calling it through a `Cls` does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Mod,
    ExtMod,
    Cls,
    Func,
    Var,
    Obj,
}

impl Kind {
    pub fn is_var(self) -> bool {
        self == Kind::Var
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kind::Mod => "mod",
            Kind::ExtMod => "ext_mod",
            Kind::Cls => "cls",
            Kind::Func => "func",
            Kind::Var => "var",
            Kind::Obj => "obj",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub name: Arc<str>,
    pub kind: Kind,
}

/// A program entity. Ordering is namespace-first so that every field path
/// rooted at some identifier sorts into one contiguous range.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    kind: Kind,
    ns: Arc<[Segment]>,
    name: Arc<str>,
}

pub const RET_FIELD: &str = "<ret>";
pub const BUILTINS: &str = "builtins";

impl Ident {
    pub fn new(kind: Kind, ns: Vec<Segment>, name: &str) -> Self {
        Ident { kind, ns: ns.into(), name: name.into() }
    }

    pub fn module(qualified: &str) -> Self {
        Ident::new(Kind::Mod, Vec::new(), qualified)
    }

    pub fn ext_module(qualified: &str) -> Self {
        Ident::new(Kind::ExtMod, Vec::new(), qualified)
    }

    /// The implicit function that runs a module's top-level statements. It
    /// renders as the bare module name.
    pub fn module_body(qualified: &str) -> Self {
        Ident::new(Kind::Func, Vec::new(), qualified)
    }

    pub fn builtin(kind: Kind, name: &str) -> Self {
        Ident::ext_module(BUILTINS).child(kind, name)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn namespace(&self) -> &[Segment] {
        &self.ns
    }

    /// Namespace that children of this identifier live in.
    pub fn path(&self) -> Vec<Segment> {
        let mut ns = self.ns.to_vec();
        ns.push(Segment { name: self.name.clone(), kind: self.kind });
        ns
    }

    pub fn child(&self, kind: Kind, name: &str) -> Ident {
        Ident::new(kind, self.path(), name)
    }

    /// `t.field`, stored under the pointee rather than under any variable.
    pub fn field(&self, name: &str) -> Ident {
        self.child(Kind::Var, name)
    }

    pub fn ret(&self) -> Ident {
        self.field(RET_FIELD)
    }

    pub fn is_ret(&self) -> bool {
        self.kind == Kind::Var && &*self.name == RET_FIELD
    }

    pub fn with_kind(&self, kind: Kind) -> Ident {
        Ident { kind, ns: self.ns.clone(), name: self.name.clone() }
    }

    /// Class of an instance; classes map to themselves.
    pub fn class_of(&self) -> Option<Ident> {
        match self.kind {
            Kind::Obj => Some(self.with_kind(Kind::Cls)),
            Kind::Cls => Some(self.clone()),
            _ => None,
        }
    }

    pub fn instance(&self) -> Ident {
        self.with_kind(Kind::Obj)
    }

    /// Root module name of this identifier.
    pub fn module_name(&self) -> &str {
        match self.ns.first() {
            Some(seg) => &seg.name,
            None => &self.name,
        }
    }

    /// True for identifiers whose source is not analysed: external modules,
    /// members of them, and the builtins namespace.
    pub fn is_stub(&self) -> bool {
        match self.ns.first() {
            Some(seg) => seg.kind == Kind::ExtMod,
            None => self.kind == Kind::ExtMod,
        }
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self.ns.first(), Some(seg) if seg.kind == Kind::ExtMod && &*seg.name == BUILTINS)
    }

    pub fn parent(&self) -> Option<Ident> {
        let (last, rest) = self.ns.split_last()?;
        Some(Ident { kind: last.kind, ns: rest.to_vec().into(), name: last.name.clone() })
    }

    /// True when `self` is a (possibly nested) field path rooted at `root`.
    pub fn is_field_of(&self, root: &Ident) -> bool {
        let depth = root.ns.len();
        self.ns.len() > depth
            && self.ns[..depth] == root.ns[..]
            && self.ns[depth].name == root.name
            && self.ns[depth].kind == root.kind
    }

    /// Method if the namespace ends in a class segment.
    pub fn enclosing_class(&self) -> Option<Ident> {
        self.parent().filter(|p| p.kind == Kind::Cls)
    }

    /// Dotted rendering, `pkg.mod.Class.func`.
    pub fn dotted(&self) -> String {
        let mut out = String::new();
        for seg in self.ns.iter() {
            out.push_str(&seg.name);
            out.push('.');
        }
        out.push_str(&self.name);
        out
    }
}

impl Ord for Ident {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ns
            .cmp(&other.ns)
            .then_with(|| self.name.cmp(&other.name))
            .then_with(|| self.kind.cmp(&other.kind))
    }
}

impl PartialOrd for Ident {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dotted())?;
        if self.kind == Kind::Obj {
            f.write_str("()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.tag(), self)
    }
}
