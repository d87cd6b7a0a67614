use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use circled_bench::{linked_pair, rational_points, surface};
use circled_core::implicit::{certify_degree, rational_samples, vanishing_kernel, DEFAULT_SEED};
use circled_core::quat::hamilton_product;
use circled_core::topology::linking_number;
use circled_core::{MonomialBasis, Preset, Projection};

fn quaternions(c: &mut Criterion) {
    let pts = rational_points(16);
    c.bench_function("hamilton_product/rational", |b| {
        b.iter(|| pts.windows(2).map(|w| hamilton_product(&w[0], &w[1])).count())
    });
    let floats: Vec<_> = pts.iter().map(|q| q.to_f64()).collect();
    c.bench_function("hamilton_product/f64", |b| b.iter(|| floats.windows(2).map(|w| hamilton_product(black_box(&w[0]), &w[1])).count()));
    let s = surface(Preset::B1);
    c.bench_function("on_sphere_certificate/A0*B1", |b| b.iter(|| black_box(&s).on_sphere_certificate()));
}

fn sampling(c: &mut Criterion) {
    let s = surface(Preset::B1);
    let mut group = c.benchmark_group("sample_grid");
    for n in [32usize, 128] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| s.sample_grid(n, n, &Projection::Stereo).unwrap()));
    }
    group.finish();
    c.bench_function("double_curve/A0*B1", |b| b.iter(|| s.double_curve(&Projection::Stereo).unwrap()));
}

fn implicitization(c: &mut Criterion) {
    let mut group = c.benchmark_group("implicit");
    group.sample_size(10);
    let s = surface(Preset::B3);
    let basis = MonomialBasis::for_projection(&Projection::Central, 4);
    let points = rational_samples(&s, &Projection::Central, basis.size() + 40, DEFAULT_SEED).unwrap();
    group.bench_function("vanishing_kernel/central_quartic", |b| b.iter(|| vanishing_kernel(&points, &basis).unwrap()));
    let clifford = surface(Preset::C);
    group.bench_function("certify_degree/clifford_torus", |b| b.iter(|| certify_degree(&clifford, &Projection::Stereo, 4, DEFAULT_SEED).unwrap()));
    group.finish();
}

fn topology(c: &mut Criterion) {
    let mut group = c.benchmark_group("linking_number");
    for n in [256usize, 1024] {
        let (circle, core) = linked_pair(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| linking_number(&circle, &core).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, quaternions, sampling, implicitization, topology);
criterion_main!(benches);
