//! Writes a synthetic project: `cargo run --example synth -- DIR [small|desk|vuln]`.

use flowcg::synth::{generate, SynthConfig};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().expect("usage: synth DIR [small|desk|vuln]");
    let cfg = match args.next().as_deref() {
        Some("small") => SynthConfig::small(),
        Some("vuln") => SynthConfig { vuln: true, ..SynthConfig::small() },
        _ => SynthConfig::desk_scale(),
    };
    let project = generate(&cfg);
    let (app, libs) = project.lines();
    project.write(std::path::Path::new(&dir))?;
    println!("app {app} lines, libraries {libs} lines");
    Ok(())
}
