use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flowcg"))
}

fn monitor() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/monitor")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn analyze_monitor(extra: &[&str]) -> Output {
    let f = monitor();
    let app = f.join("app");
    let lib = f.join("lib");
    let mut args = vec!["analyze", "--app-root", app.to_str().unwrap(), "--lib-root", lib.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn analyze_adjacency_to_stdout() {
    let o = analyze_monitor(&["--mode", "aa", "--entry", "bpytop.process", "--entry", "bpytop.options", "-o", "-"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "{\"bpytop.Base.collect\": [\"bpytop.Proc.do\"], \"bpytop.Cpu.redo\": [], \"bpytop.Proc.do\": [], \
         \"bpytop.options\": [\"bpytop.Base.collect\"], \"bpytop.process\": [\"bpytop.Cpu.redo\"]}\n"
    );
}

#[test]
fn analyze_edges_format_has_sites() {
    let o = analyze_monitor(&["--mode", "aa", "--entry", "bpytop.process", "--format", "edges", "-o", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"caller\": \"bpytop.process\""), "{text}");
    assert!(text.contains("\"site\": \"bpytop:11:"), "{text}");
}

#[test]
fn sequential_matches_parallel() {
    let a = analyze_monitor(&["--mode", "ew", "-o", "-"]);
    let b = analyze_monitor(&["--mode", "ew", "--sequential", "-o", "-"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("psutil.virtual_memory"));
}

#[test]
fn config_errors_exit_1() {
    assert_eq!(run(&["analyze", "--mode", "aw", "--app-root", "/nonexistent", "-o", "-"]).status.code(), Some(1));
    let o = analyze_monitor(&["--mode", "aa", "--entry", "bpytop.nothing", "-o", "-"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bpytop.nothing"));
}

#[test]
fn syntax_errors_exit_2_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("good.py"), "def f(): pass\n\nf()\n").unwrap();
    std::fs::write(dir.path().join("bad.py"), "def (:\n").unwrap();
    let out = dir.path().join("cg.json");
    let o = run(&["analyze", "--mode", "aw", "--app-root", dir.path().to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(std::fs::read_to_string(out).unwrap().contains("\"good\": [\"good.f\"]"));
}

#[test]
fn score_and_reach() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen.json");
    let gt = dir.path().join("gt.json");
    std::fs::write(&gen, "{\"main\": [\"main.a\", \"main.b\"], \"main.a\": [\"lib.bad\"]}").unwrap();
    std::fs::write(&gt, "{\"main\": [\"main.a\"], \"main.a\": [\"lib.bad\"], \"main.c\": [\"lib.ok\"]}").unwrap();
    let o = run(&["score", "--gen", gen.to_str().unwrap(), "--gt", gt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "precision 0.6667\nrecall 0.6667\nfp main -> main.b\nfn main.c -> lib.ok\n"
    );
    let o = run(&[
        "reach", "--cg", gt.to_str().unwrap(), "--entry", "main", "--target", "lib.bad", "--target", "lib.ok",
        "--target", "lib.none",
    ]);
    assert_eq!(stdout(&o), "reachable lib.bad: main -> main.a -> lib.bad\nsafe lib.ok\nunknown lib.none\n");
}

#[test]
fn unreadable_graph_exits_1() {
    assert_eq!(run(&["score", "--gen", "/nonexistent", "--gt", "/nonexistent"]).status.code(), Some(1));
}
