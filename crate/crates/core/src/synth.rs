//! Synthetic Python projects for scale tests and benchmarks.
//!
//! An application package calls into layered library packages. Inside a
//! library, module `mJ` only imports from lower-numbered modules and lower
//! numbered libraries, so the import graph is acyclic and every call target
//! exists. Output is a pure function of the config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub app_modules: usize,
    pub app_functions: usize,
    pub libs: usize,
    pub lib_modules: usize,
    pub classes: usize,
    pub methods: usize,
    pub functions: usize,
    /// Adds `vulnlib` with one function reachable from `app.main` through
    /// exactly one chain and one function only reachable from dead app code.
    pub vuln: bool,
}

impl SynthConfig {
    /// About 5k lines of application code over 20 libraries, roughly 100k
    /// lines in total.
    pub fn desk_scale() -> Self {
        SynthConfig {
            seed: 7,
            app_modules: 33,
            app_functions: 12,
            libs: 20,
            lib_modules: 20,
            classes: 3,
            methods: 7,
            functions: 6,
            vuln: false,
        }
    }

    pub fn small() -> Self {
        SynthConfig {
            seed: 1,
            app_modules: 3,
            app_functions: 4,
            libs: 3,
            lib_modules: 3,
            classes: 2,
            methods: 3,
            functions: 3,
            vuln: false,
        }
    }
}

/// Generated files, relative paths to contents.
#[derive(Debug, Clone, Default)]
pub struct SynthProject {
    pub app: BTreeMap<PathBuf, String>,
    pub libs: BTreeMap<PathBuf, String>,
}

impl SynthProject {
    pub fn lines(&self) -> (usize, usize) {
        let count = |m: &BTreeMap<PathBuf, String>| m.values().map(|s| s.lines().count()).sum();
        (count(&self.app), count(&self.libs))
    }

    /// Writes `app/` and `libs/` under `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        let app = dir.join("app");
        let libs = dir.join("libs");
        for (root, files) in [(&app, &self.app), (&libs, &self.libs)] {
            for (rel, text) in files {
                let path = root.join(rel);
                std::fs::create_dir_all(path.parent().expect("relative file path"))?;
                std::fs::write(path, text)?;
            }
        }
        Ok((app, libs))
    }
}

pub fn generate(cfg: &SynthConfig) -> SynthProject {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut p = SynthProject::default();
    for l in 0..cfg.libs {
        for j in 0..cfg.lib_modules {
            let text = lib_module(cfg, &mut rng, l, j);
            p.libs.insert(PathBuf::from(format!("lib{l:02}/m{j:02}.py")), text);
        }
        p.libs.insert(PathBuf::from(format!("lib{l:02}/__init__.py")), lib_init(cfg, l));
    }
    for a in 0..cfg.app_modules {
        let text = app_module(cfg, &mut rng, a);
        p.app.insert(PathBuf::from(format!("app/feature{a:02}.py")), text);
    }
    p.app.insert(PathBuf::from("app/__init__.py"), String::new());
    p.app.insert(PathBuf::from("app/main.py"), app_main(cfg));
    if cfg.vuln {
        p.app.insert(PathBuf::from("app/ingest.py"), VULN_INGEST.to_string());
        p.app.insert(PathBuf::from("app/legacy.py"), VULN_LEGACY.to_string());
        p.libs.insert(PathBuf::from("vulnlib/__init__.py"), String::new());
        p.libs.insert(PathBuf::from("vulnlib/codec.py"), VULN_CODEC.to_string());
    }
    p
}

const VULN_INGEST: &str = "from vulnlib import codec


def read(blob):
    return codec.decode(blob)
";

const VULN_LEGACY: &str = "from vulnlib.codec import unsafe_load


def convert(blob):
    return unsafe_load(blob)
";

const VULN_CODEC: &str = "def decode(blob):
    return blob


def unsafe_load(blob):
    return blob
";

/// `libLL` re-exports the first function of each module as `api_J`.
fn lib_init(cfg: &SynthConfig, _l: usize) -> String {
    let mut out = String::new();
    for j in 0..cfg.lib_modules {
        let _ = writeln!(out, "from .m{j:02} import f{j:02}_0 as api_{j}");
    }
    out
}

fn lib_module(cfg: &SynthConfig, rng: &mut ChaCha8Rng, l: usize, j: usize) -> String {
    let mut out = String::new();
    // Lower modules of this library, imported by function name.
    let mut local: Vec<String> = Vec::new();
    if j > 0 {
        let mut lower: Vec<usize> = (0..j).collect();
        lower.shuffle(rng);
        for &k in lower.iter().take(2) {
            let t = rng.gen_range(0..cfg.functions);
            let _ = writeln!(out, "from .m{k:02} import f{k:02}_{t}");
            local.push(format!("f{k:02}_{t}"));
        }
    }
    // Lower libraries, through their package API.
    let mut remote: Vec<String> = Vec::new();
    if l > 0 {
        for _ in 0..2 {
            let d = rng.gen_range(0..l);
            let _ = writeln!(out, "import lib{d:02}");
            let api = rng.gen_range(0..cfg.lib_modules);
            remote.push(format!("lib{d:02}.api_{api}"));
        }
    }
    out.push_str("\n\n");
    let helpers: Vec<String> = local.iter().chain(&remote).cloned().collect();

    for c in 0..cfg.classes {
        let name = format!("C{j:02}_{c}");
        let base = (c > 0 && rng.gen_bool(0.3)).then(|| format!("C{j:02}_{}", c - 1));
        match &base {
            Some(b) => {
                let _ = writeln!(out, "class {name}({b}):");
            }
            None => {
                let _ = writeln!(out, "class {name}:");
            }
        }
        let _ = writeln!(out, "    limit = {}\n", rng.gen_range(1..100));
        let _ = writeln!(out, "    def __init__(self, value=None):");
        if base.is_some() {
            let _ = writeln!(out, "        super().__init__(value)");
        }
        if c > 0 {
            let peer = rng.gen_range(0..c);
            let _ = writeln!(out, "        self.peer = C{j:02}_{peer}()");
        } else {
            let _ = writeln!(out, "        self.peer = None");
        }
        let _ = writeln!(out, "        self.value = value\n");
        for m in 0..cfg.methods {
            let _ = writeln!(out, "    def m{m}(self, x):");
            if m > 0 {
                let k = rng.gen_range(0..m);
                let _ = writeln!(out, "        y = self.m{k}(x)");
            } else {
                let _ = writeln!(out, "        y = x");
            }
            let _ = writeln!(out, "        if y is None:");
            if c > 0 {
                let k = rng.gen_range(0..cfg.methods);
                let _ = writeln!(out, "            y = self.peer.m{k}(y)");
            } else {
                let _ = writeln!(out, "            y = self.value");
            }
            let _ = writeln!(out, "        else:");
            match helpers.choose(rng) {
                Some(h) if rng.gen_bool(0.5) => {
                    let _ = writeln!(out, "            y = {h}(y)");
                }
                _ => {
                    let _ = writeln!(out, "            y = [y, self.limit]");
                }
            }
            let _ = writeln!(out, "        return y\n");
        }
        out.push('\n');
    }

    for t in 0..cfg.functions {
        let c = rng.gen_range(0..cfg.classes);
        let m = rng.gen_range(0..cfg.methods);
        let _ = writeln!(out, "def f{j:02}_{t}(a=None):");
        let _ = writeln!(out, "    obj = C{j:02}_{c}(a)");
        let _ = writeln!(out, "    r = obj.m{m}(a)");
        match helpers.choose(rng) {
            Some(h) => {
                let _ = writeln!(out, "    return {h}(r)");
            }
            None => {
                let _ = writeln!(out, "    return r");
            }
        }
        out.push_str("\n\n");
    }
    out
}

fn app_module(cfg: &SynthConfig, rng: &mut ChaCha8Rng, a: usize) -> String {
    let mut out = String::new();
    let mut libs: Vec<usize> = (0..cfg.libs).collect();
    libs.shuffle(rng);
    let used: Vec<usize> = libs.into_iter().take(3).collect();
    for l in &used {
        let _ = writeln!(out, "import lib{l:02}");
    }
    if a > 0 {
        let _ = writeln!(out, "from app import feature{:02} as prev", a - 1);
    }
    out.push_str("\n\n");
    let _ = writeln!(out, "class Service{a:02}:");
    let _ = writeln!(out, "    def __init__(self):");
    let _ = writeln!(out, "        self.handlers = []\n");
    for h in 0..cfg.app_functions / 2 {
        let l = used[rng.gen_range(0..used.len())];
        let api = rng.gen_range(0..cfg.lib_modules);
        let _ = writeln!(out, "    def handle{h}(self, request):");
        let _ = writeln!(out, "        result = lib{l:02}.api_{api}(request)");
        let _ = writeln!(out, "        if result:");
        let _ = writeln!(out, "            self.handlers.append(result)");
        let _ = writeln!(out, "        return result\n");
    }
    out.push('\n');
    for t in 0..cfg.app_functions {
        let _ = writeln!(out, "def task{t}(payload=None):");
        let _ = writeln!(out, "    service = Service{a:02}()");
        let h = rng.gen_range(0..(cfg.app_functions / 2).max(1));
        if cfg.app_functions >= 2 {
            let _ = writeln!(out, "    out = service.handle{h}(payload)");
        } else {
            let _ = writeln!(out, "    out = payload");
        }
        if a > 0 && rng.gen_bool(0.3) {
            let p = rng.gen_range(0..cfg.app_functions);
            let _ = writeln!(out, "    out = prev.task{p}(out)");
        }
        let _ = writeln!(out, "    for item in [out]:");
        let _ = writeln!(out, "        print(item)");
        let _ = writeln!(out, "    return out\n\n");
    }
    out
}

fn app_main(cfg: &SynthConfig) -> String {
    let mut out = String::new();
    for a in 0..cfg.app_modules {
        let _ = writeln!(out, "from app import feature{a:02}");
    }
    if cfg.vuln {
        out.push_str("from app import ingest\n");
    }
    out.push_str("\n\ndef run():\n");
    for a in 0..cfg.app_modules {
        let _ = writeln!(out, "    feature{a:02}.task0()");
    }
    out.push_str("    return 0\n\n\n");
    out.push_str("if __name__ == \"__main__\":\n");
    if cfg.vuln {
        out.push_str("    ingest.read(b\"data\")\n");
    }
    out.push_str("    run()\n");
    out
}
