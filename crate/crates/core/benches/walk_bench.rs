//! Sequential vs parallel throughput of the walk engine.
//!
//! `full_run` benchmarks a complete fractal-mode evolution at a few sizes;
//! `step_at_width` isolates the per-step kernel on an already-wide lattice,
//! where the parallel chunking has something to chew on. On a single-core
//! host the two policies should tie (the kernel falls back below its
//! threshold); with more cores the parallel rows pull ahead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fractal_walk::{CoinParams, Mode, Parallelism, RunSpec, Simulation};
use std::f64::consts::FRAC_PI_4;

fn spec(t_max: u64, parallelism: Parallelism) -> RunSpec {
    let mut spec = RunSpec::new(Mode::Fractal, CoinParams::new(FRAC_PI_4, FRAC_PI_4), t_max);
    spec.parallelism = parallelism;
    spec
}

fn policies() -> Vec<(&'static str, Parallelism)> {
    vec![
        ("sequential", Parallelism::Sequential),
        ("auto", Parallelism::Auto),
    ]
}

fn bench_full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_run");
    group.sample_size(10);
    for t_max in [2_000u64, 20_000] {
        for (name, par) in policies() {
            group.bench_with_input(BenchmarkId::new(name, t_max), &t_max, |b, &t_max| {
                b.iter(|| {
                    let mut sim = Simulation::new(spec(t_max, par)).unwrap();
                    for _ in 0..t_max {
                        sim.step();
                    }
                    sim.norm()
                })
            });
        }
    }
    group.finish();
}

fn bench_step_at_width(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_at_width");
    group.sample_size(20);
    let warm = 100_000u64;
    for (name, par) in policies() {
        // Walk out to a wide window once, then time stepping from there.
        let mut sim = Simulation::new(spec(warm + 2_000, par)).unwrap();
        for _ in 0..warm {
            sim.step();
        }
        group.bench_function(BenchmarkId::new(name, warm), |b| {
            b.iter(|| {
                sim.step();
                sim.t()
            })
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy_sweep_grid");
    group.sample_size(10);
    let thetas: Vec<f64> = (1..=6).map(|i| i as f64 * 0.2).collect();
    for (name, par) in policies() {
        group.bench_function(name, |b| {
            b.iter(|| {
                par.map(&thetas, |&theta| {
                    let mut spec = spec(400, Parallelism::Sequential);
                    spec.params = CoinParams::new(theta, theta);
                    let mut sim = Simulation::new(spec).unwrap();
                    for _ in 0..400 {
                        sim.step();
                    }
                    fractal_walk::entanglement_entropy(&sim.coin_density()).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_full_run, bench_step_at_width, bench_sweep);
criterion_main!(benches);
