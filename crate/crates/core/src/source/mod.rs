//! Source discovery and parsing.

pub mod cfg;
pub mod site;
pub mod walk;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::warn;
use rustpython_parser::{ast, Parse};
use walkdir::WalkDir;

use crate::error::{ConfigError, ModuleError};
pub use site::{ExprSite, LineIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleKind {
    Mod,
    ExtMod,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModule {
    pub path: PathBuf,
    pub qualified_name: String,
    pub kind: ModuleKind,
    pub is_library: bool,
    pub is_package: bool,
}

/// A parsed module: the statement list plus the line index used to turn
/// byte offsets into sites.
#[derive(Debug)]
pub struct ParsedModule {
    pub suite: Vec<ast::Stmt>,
    pub lines: LineIndex,
}

#[derive(Debug, Default, Clone)]
pub struct ModuleTable {
    modules: BTreeMap<String, SourceModule>,
    pub warnings: Vec<String>,
}

impl ModuleTable {
    pub fn get(&self, name: &str) -> Option<&SourceModule> {
        self.modules.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.modules.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceModule> {
        self.modules.values()
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    /// Adds a module unless the name is taken. Returns false on collision.
    pub fn insert(&mut self, module: SourceModule) -> bool {
        if let Some(existing) = self.modules.get(&module.qualified_name) {
            let msg = format!(
                "duplicate module `{}`: keeping {}, ignoring {}",
                module.qualified_name,
                existing.path.display(),
                module.path.display()
            );
            warn!("{msg}");
            self.warnings.push(msg);
            return false;
        }
        self.modules.insert(module.qualified_name.clone(), module);
        true
    }
}

/// Indexes every `*.py` file under the application root and then under each
/// library root, in order. On a name collision the earlier root wins.
pub fn discover_modules(app_root: &Path, lib_roots: &[PathBuf]) -> Result<ModuleTable, ConfigError> {
    let mut table = ModuleTable::default();
    scan_root(&mut table, app_root, false)?;
    for root in lib_roots {
        scan_root(&mut table, root, true)?;
    }
    Ok(table)
}

fn scan_root(table: &mut ModuleTable, root: &Path, is_library: bool) -> Result<(), ConfigError> {
    let unreadable = |source| ConfigError::UnreadableRoot { path: root.to_path_buf(), source };
    let meta = std::fs::metadata(root).map_err(unreadable)?;
    if !meta.is_dir() {
        return Err(unreadable(std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory")));
    }
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| {
            let name = e.file_name().to_string_lossy();
            e.depth() == 0 || !(name.starts_with('.') || name == "__pycache__")
        })
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    for path in files {
        let Some((qualified_name, is_package)) = qualified_name(root, &path) else {
            continue;
        };
        table.insert(SourceModule { path, qualified_name, kind: ModuleKind::Mod, is_library, is_package });
    }
    Ok(())
}

fn qualified_name(root: &Path, path: &Path) -> Option<(String, bool)> {
    let rel = path.strip_prefix(root).ok()?;
    let mut parts: Vec<String> = rel.iter().map(|p| p.to_string_lossy().into_owned()).collect();
    let file = parts.pop()?;
    let stem = file.strip_suffix(".py")?;
    let is_package = stem == "__init__";
    if !is_package {
        parts.push(stem.to_string());
    }
    if parts.is_empty() {
        // `__init__.py` directly under the root names the root package itself.
        let dir = root.canonicalize().ok()?;
        parts.push(dir.file_name()?.to_string_lossy().into_owned());
    }
    if parts.iter().any(|p| p.is_empty() || p.contains('.')) {
        return None;
    }
    Some((parts.join("."), is_package))
}

pub fn parse_module(module: &SourceModule) -> Result<ParsedModule, ModuleError> {
    let bytes = std::fs::read(&module.path)
        .map_err(|e| ModuleError::Io(module.qualified_name.clone(), e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|_| ModuleError::Encoding(module.qualified_name.clone()))?;
    parse_source(&module.qualified_name, &text)
}

pub fn parse_source(name: &str, text: &str) -> Result<ParsedModule, ModuleError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines = LineIndex::new(text);
    match ast::Suite::parse(text, name) {
        Ok(suite) => Ok(ParsedModule { suite, lines }),
        Err(err) => {
            let (line, _) = lines.locate(err.offset.to_u32());
            Err(ModuleError::Syntax { module: name.to_string(), line, message: err.error.to_string() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(path: &Path, text: &str) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }

    #[test]
    fn single_file_application() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("bpytop.py"), "x = 1\n");
        let table = discover_modules(dir.path(), &[]).unwrap();
        let m = table.get("bpytop").unwrap();
        assert_eq!(m.kind, ModuleKind::Mod);
        assert!(!m.is_library);
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn library_roots_are_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let app = dir.path().join("a");
        let lib = dir.path().join("v");
        write(&app.join("m.py"), "");
        write(&lib.join("psutil/__init__.py"), "");
        let table = discover_modules(&app, &[lib]).unwrap();
        assert!(!table.get("m").unwrap().is_library);
        let ps = table.get("psutil").unwrap();
        assert!(ps.is_library && ps.is_package);
    }

    #[test]
    fn first_root_wins_on_collision() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        write(&a.join("util.py"), "A = 1\n");
        write(&b.join("util.py"), "B = 1\n");
        let table = discover_modules(&a, &[b]).unwrap();
        assert_eq!(table.get("util").unwrap().path, a.join("util.py"));
        assert_eq!(table.warnings.len(), 1);
    }

    #[test]
    fn missing_root_is_a_configuration_error() {
        let err = discover_modules(Path::new("/definitely/not/here"), &[]).unwrap_err();
        assert!(matches!(err, ConfigError::UnreadableRoot { .. }));
    }

    #[test]
    fn parses_assignment_on_line_one() {
        let parsed = parse_source("m", "x = 1").unwrap();
        assert_eq!(parsed.suite.len(), 1);
        assert!(matches!(parsed.suite[0], ast::Stmt::Assign(_)));
    }

    #[test]
    fn syntax_error_is_reported_not_panicked() {
        let err = parse_source("m", "def f(:\n    pass\n").unwrap_err();
        assert!(matches!(err, ModuleError::Syntax { line: 1, .. }));
    }

    #[test]
    fn non_utf8_is_unanalyzable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("latin.py");
        fs::write(&path, b"s = '\xe9'\n").unwrap();
        let module = SourceModule {
            path,
            qualified_name: "latin".into(),
            kind: ModuleKind::Mod,
            is_library: false,
            is_package: false,
        };
        assert_eq!(parse_module(&module).unwrap_err(), ModuleError::Encoding("latin".into()));
    }
}
