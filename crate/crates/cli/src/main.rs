//! Command-line front end: `analyze`, `score` and `reach`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use flowcg::driver::{self, CallGraph, Format, Mode, ScenarioConfig, Verdict};

#[derive(Parser)]
#[command(name = "flowcg", version, about = "Flow-sensitive call graphs for Python applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ea,
    Ew,
    Aa,
    Aw,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Adjacency,
    Edges,
}

#[derive(Subcommand)]
enum Command {
    /// Build a call graph.
    Analyze {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        app_root: PathBuf,
        #[arg(long)]
        lib_root: Vec<PathBuf>,
        #[arg(long)]
        entry: Vec<String>,
        #[arg(long)]
        builtin_table: Option<PathBuf>,
        /// Output file, `-` for stdout.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "adjacency")]
        format: FormatArg,
        /// Run sessions one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Precision and recall of a generated graph against ground truth.
    Score {
        #[arg(long)]
        gen: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Call chains from entries to (vulnerable) targets.
    Reach {
        #[arg(long)]
        cg: PathBuf,
        #[arg(long, required = true)]
        entry: Vec<String>,
        #[arg(long, required = true)]
        target: Vec<String>,
    },
}

/// Configuration problems exit 1, analysis problems 2.
enum Failure {
    Config(anyhow::Error),
    Analysis(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

fn read_graph(path: &PathBuf) -> anyhow::Result<CallGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CallGraph::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { mode, app_root, lib_root, entry, builtin_table, output, format, sequential } => {
            let mode = match mode {
                ModeArg::Ea => Mode::EA,
                ModeArg::Ew => Mode::EW,
                ModeArg::Aa => Mode::AA,
                ModeArg::Aw => Mode::AW,
            };
            let mut cfg = ScenarioConfig::new(mode, app_root);
            cfg.lib_roots = lib_root;
            cfg.entries = entry;
            cfg.builtins = builtin_table;
            if sequential {
                cfg.schedule = driver::Schedule::Sequential;
            }
            let result = driver::run_scenario(&cfg)?;
            let format = match format {
                FormatArg::Adjacency => Format::Adjacency,
                FormatArg::Edges => Format::Edges,
            };
            let text = result.graph.emit(format);
            if output.as_os_str() == "-" {
                print!("{text}");
            } else {
                std::fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
            }
            for d in &result.diagnostics {
                log::info!("{d}");
            }
            let s = result.stats;
            log::info!(
                "{} entries, {} analyses, {} cache hits, {} rule applications, {} recursion cuts, {} unresolved calls",
                result.entries.len(),
                s.analyses,
                s.cache_hits,
                s.rule_applications,
                s.recursion_cuts,
                s.unresolved_calls
            );
            if !result.errors.is_empty() {
                let msgs: Vec<String> = result.errors.iter().map(|e| e.to_string()).collect();
                return Err(Failure::Analysis(msgs.join("\n")));
            }
        }
        Command::Score { gen, gt } => {
            let report = driver::score(&read_graph(&gen)?, &read_graph(&gt)?);
            println!("precision {:.4}", report.precision);
            println!("recall {:.4}", report.recall);
            for (a, b) in &report.fp {
                println!("fp {a} -> {b}");
            }
            for (a, b) in &report.fn_ {
                println!("fn {a} -> {b}");
            }
        }
        Command::Reach { cg, entry, target } => {
            let graph = read_graph(&cg)?;
            for (t, verdict) in driver::vuln_chains(&graph, &entry, &target) {
                match verdict {
                    Verdict::Reachable(chain) => println!("reachable {t}: {}", chain.join(" -> ")),
                    Verdict::Safe => println!("safe {t}"),
                    Verdict::Unknown => println!("unknown {t}"),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("analysis errors (partial output written):\n{msg}");
            ExitCode::from(2)
        }
    }
}
