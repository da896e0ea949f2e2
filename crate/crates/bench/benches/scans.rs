use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

use recurlab::hcvec::dense_targets;
use recurlab::setcalc::{density_report, materialize};
use recurlab::shiftop::{recurrence_set, ExactVector, Mode, SpaceSpec, WeightSequence};
use recurlab::structure::ps_certificate;
use recurlab::GeneratorSpec;

fn interval_family(w: usize) -> recurlab::WindowedSet {
    materialize(&GeneratorSpec::IntervalFamily { n: 3 }, w).unwrap()
}

fn densities(c: &mut Criterion) {
    let mut g = c.benchmark_group("density_report");
    for k in [14u32, 16, 18] {
        let w = 1usize << k;
        let a = interval_family(w);
        g.bench_with_input(BenchmarkId::from_parameter(w), &a, |b, a| {
            b.iter(|| density_report(black_box(a), w / 16, &[w / 16]).unwrap())
        });
    }
    g.finish();
}

fn certificates(c: &mut Criterion) {
    let mut g = c.benchmark_group("ps_certificate");
    let w = 1usize << 18;
    let e = interval_family(w);
    let comp = e.complement();
    g.bench_function("refute_complement", |b| {
        b.iter(|| ps_certificate(black_box(&comp), 16, 64).unwrap())
    });
    g.bench_function("certify_thick", |b| b.iter(|| ps_certificate(black_box(&e), 1, 1 << 15).unwrap()));
    g.finish();
}

/// A sparse `x` with one planted return every 50 steps.
fn planted(w: &WeightSequence, z: &ExactVector, window: usize) -> ExactVector {
    let mut x = ExactVector::zero();
    for n in (0..window).step_by(50) {
        for (r, zr) in z.iter() {
            x.add_at(n + r, &(zr / w.product_exact(r, n).unwrap()));
        }
    }
    x
}

fn recurrence(c: &mut Criterion) {
    let mut g = c.benchmark_group("recurrence_set");
    g.sample_size(10);
    let target = dense_targets(1, 14).unwrap();
    let eps: BigRational = target.radius.inner().clone();
    for window in [1000usize, 4000] {
        let w = WeightSequence::constant(BigRational::from_integer(2.into()), window + 8).unwrap();
        let x = planted(&w, &target.z, window);
        for mode in [Mode::Exact, Mode::Float] {
            g.bench_with_input(BenchmarkId::new(mode.to_string(), window), &x, |b, x| {
                b.iter(|| recurrence_set(&w, black_box(x), &target.z, &eps, &SpaceSpec::lp(2), window, mode).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, densities, certificates, recurrence);
criterion_main!(benches);
