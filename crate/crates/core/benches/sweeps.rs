use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qet_core::chain::edge_correlators_vs_l;
use qet_core::model::{solve_ground_state_analytic, ModelParams};
use qet_core::optimum::{brute_force_max, sweep_figure3, Target};
use qet_core::thermo::entropy_minimization_scan;
use qet_core::Exec;

fn policies() -> Vec<(&'static str, Exec)> {
    let mut v = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Exec::Parallel));
    v
}

fn sweeps(c: &mut Criterion) {
    let g = solve_ground_state_analytic(&ModelParams::new(0.3, 1.0).unwrap()).unwrap();
    let hs: Vec<f64> = (0..=600).map(|i| i as f64 * 0.005).collect();
    let ls: Vec<usize> = (1..=10).map(|i| 50 * i).collect();

    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    for (name, exec) in policies() {
        group.bench_with_input(BenchmarkId::new("brute_force_64", name), &exec, |b, &exec| {
            b.iter(|| brute_force_max(black_box(&g), Target::ExtractedEnergy, 64, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("entropy_scan_64x128", name), &exec, |b, &exec| {
            b.iter(|| entropy_minimization_scan(black_box(&g), 64, 128, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("chain_L50_to_500", name), &exec, |b, &exec| {
            b.iter(|| edge_correlators_vs_l(0.5, 1.0, black_box(&ls), exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("extraction_sweep_601", name), &exec, |b, &exec| {
            b.iter(|| sweep_figure3(1.0, black_box(&hs), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
