//! Parallel against sequential session scheduling on synthetic projects.
//! On a single core the two should be close; the gap grows with cores.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flowcg::driver::{analyze_program, discover_entries, load_program, Mode, ScenarioConfig, Schedule};
use flowcg::inter::Limits;
use flowcg::synth::{generate, SynthConfig};

fn schedules(c: &mut Criterion) {
    let medium = SynthConfig { app_modules: 10, libs: 6, lib_modules: 8, ..SynthConfig::desk_scale() };
    let mut group = c.benchmark_group("schedule");
    group.sample_size(10);
    for (name, cfg) in [("small", SynthConfig::small()), ("medium", medium)] {
        let dir = tempfile::tempdir().unwrap();
        let (app, libs) = generate(&cfg).write(dir.path()).unwrap();
        let mut sc = ScenarioConfig::new(Mode::AW, app);
        sc.lib_roots = vec![libs];
        let program = load_program(&sc).unwrap();
        let entries = discover_entries(&program, Mode::AW, &[]).unwrap();
        for (label, schedule) in [("parallel", Schedule::Parallel), ("sequential", Schedule::Sequential)] {
            group.bench_with_input(BenchmarkId::new(label, name), &schedule, |b, &s| {
                b.iter(|| analyze_program(&program, &entries, Limits::default(), s))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, schedules);
criterion_main!(benches);
