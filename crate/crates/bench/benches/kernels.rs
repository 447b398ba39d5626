use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dol_bench::{itinerary, orbit_points, wavy_graph};
use dol_core::density::{coverage, OmegaDomain};
use dol_core::lipschitz::lipschitz_estimate;
use dol_core::orbit::{build_orbit, orbit_point};
use dol_core::packing::{pack_balls, ExactGeometry};
use dol_core::TolerancePolicy;

fn orbit_kernels(c: &mut Criterion) {
    let it = itinerary(1, &[2.0, 1.0, 0.5]);
    c.bench_function("orbit_point depth 120", |b| {
        b.iter(|| orbit_point(black_box(&it), black_box(1234), 120))
    });
    let policy = TolerancePolicy::default();
    c.bench_function("build_orbit m=1 eps 2..0.5", |b| {
        b.iter(|| build_orbit(&it, it.len(), &policy).unwrap())
    });
}

fn coverage_kernel(c: &mut Criterion) {
    let pts = orbit_points(1, &[2.0, 1.0, 0.5, 0.25]);
    let dom = OmegaDomain { m: 1 };
    let mut g = c.benchmark_group("coverage");
    for eps in [1.0, 0.5, 0.25] {
        g.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| coverage(&pts, &dom, eps).unwrap())
        });
    }
    g.finish();
}

fn packing_kernel(c: &mut Criterion) {
    let disc = ExactGeometry::unit_disc();
    let mut g = c.benchmark_group("pack_balls disc");
    for h in [0.1, 0.05, 0.025] {
        g.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            b.iter(|| pack_balls(&disc, h).unwrap())
        });
    }
    g.finish();
}

fn lipschitz_kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("lipschitz_estimate");
    for n in [500, 2000, 20_000] {
        let s = wavy_graph(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| lipschitz_estimate(s).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    orbit_kernels,
    coverage_kernel,
    packing_kernel,
    lipschitz_kernel
);
criterion_main!(benches);
