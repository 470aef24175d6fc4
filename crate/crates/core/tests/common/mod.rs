#![allow(dead_code)]

use std::path::{Path, PathBuf};

use flowcg::driver::graph::CallGraph;
use flowcg::driver::{run_scenario, Mode, ScenarioConfig, Schedule};
use tempfile::TempDir;

/// Writes `files` (relative path, text) under a fresh temp dir.
pub fn project(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().expect("tempdir");
    for (rel, text) in files {
        let p = dir.path().join(rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, text).unwrap();
    }
    dir
}

pub fn config(mode: Mode, app: &Path, libs: &[PathBuf], entries: &[&str]) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(mode, app);
    cfg.lib_roots = libs.to_vec();
    cfg.entries = entries.iter().map(|s| s.to_string()).collect();
    cfg.schedule = Schedule::Sequential;
    cfg
}

pub fn analyze(mode: Mode, app: &Path, libs: &[PathBuf], entries: &[&str]) -> CallGraph {
    run_scenario(&config(mode, app, libs, entries)).expect("scenario runs").graph
}

/// Call graph of a single `main.py` analysed from its module body.
pub fn main_graph(src: &str) -> CallGraph {
    let dir = project(&[("main.py", src)]);
    analyze(Mode::AW, dir.path(), &[], &["main"])
}

pub fn callees(cg: &CallGraph, caller: &str) -> Vec<String> {
    cg.edges().filter(|(a, _)| *a == caller).map(|(_, b)| b.to_string()).collect()
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}
