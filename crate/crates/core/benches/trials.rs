//! Seeded trial suites in the global rayon pool versus a one-thread pool.
//! Built without the `parallel` feature, both variants run the sequential
//! fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use courant_core::brackets::diagnostics::jacobi_diagnostics;
use courant_core::brackets::{BracketKind, BracketSpec};
use courant_core::lift::check_natural;
use courant_core::sampling::SamplePlan;
use courant_core::torus::torus_jacobi_search;

fn spec(kind: BracketKind, n: usize) -> BracketSpec {
    BracketSpec::standard(kind, n).unwrap()
}

fn suites(c: &mut Criterion) {
    let sequential = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let plan = SamplePlan::default();
    let cd = spec(BracketKind::CourantDorfman, 3);
    let mixed = spec(BracketKind::Mixed(1, 1), 3);

    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    let mut both = |name: &str, run: &(dyn Fn() + Sync)| {
        group.bench_function(BenchmarkId::new(name, "parallel"), |b| b.iter(run));
        group.bench_function(BenchmarkId::new(name, "sequential"), |b| b.iter(|| sequential.install(run)));
    };
    both("jacobi courant-dorfman", &|| assert!(jacobi_diagnostics(&cd, &plan).holds()));
    both("naturality mixed:1,1", &|| assert!(check_natural(&mixed, &plan).all_pass()));
    both("torus jacobiator", &|| assert!(torus_jacobi_search(0, 400, 3).is_none()));
    group.finish();
}

criterion_group!(benches, suites);
criterion_main!(benches);
