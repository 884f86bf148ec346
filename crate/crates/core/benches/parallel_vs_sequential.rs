use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use layerstrip::grids::RectGrid;
use layerstrip::harness::order_table;
use layerstrip::problems::{omega1, test_problem};
use layerstrip::{Exec, Layout, SolverConfig};

// Without the `parallel` feature both policies run the same sequential code.
const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn grid_mask(c: &mut Criterion) {
    let b = omega1(0.5);
    let mut group = c.benchmark_group("grid_mask");
    for n in [128usize, 256] {
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |bench, &n| {
                bench.iter(|| RectGrid::build(&b, n, 1e-3, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn layout(c: &mut Criterion) {
    let b = omega1(0.5);
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("layout");
    for (name, exec) in POLICIES {
        group.bench_function(name, |bench| {
            bench.iter(|| Layout::new(&b, 128, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn table(c: &mut Criterion) {
    let case = test_problem(1, 0.5).unwrap();
    let eps = [1.0, 2f64.powi(-8), 2f64.powi(-16)];
    let mut group = c.benchmark_group("order_table");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in POLICIES {
        group.bench_function(name, |bench| {
            bench.iter(|| order_table(&case, &eps, &[16, 32], exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, grid_mask, layout, table);
criterion_main!(benches);
