use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use odeheat::experiments::{preset, sweep};
use odeheat::{Execution, HumProblem};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn epsilon_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("epsilon_sweep");
    group.sample_size(10);
    for name in ["test1", "test3"] {
        let cfg = preset(name).unwrap();
        let prepared = cfg.prepare().unwrap();
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, name), &exec, |b, &exec| {
                b.iter(|| sweep(&cfg, &prepared, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn gramian_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("gramian_columns");
    group.sample_size(10);
    let cfg = preset("test1").unwrap();
    let p = cfg.prepare().unwrap();
    let problem = HumProblem::new(&p.grid, &p.data, &p.solver).unwrap();
    for (label, exec) in MODES {
        group.bench_function(label, |b| b.iter(|| problem.gramian_columns(exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, epsilon_sweep, gramian_assembly);
criterion_main!(benches);
