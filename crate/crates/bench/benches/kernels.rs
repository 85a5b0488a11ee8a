use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lksmult::multipliers::{energy_constant, random_nu, Strategy};
use lksmult::potentials::{capacity_value, CapacityMethod};
use lksmult::singular::{composite_weight, polygon_structure};
use lksmult::spectra::{resolvent_probe, NuMeasure, SymbolSpec};
use lksmult::weights::lks_weight;
use lksmult::{CoeffSeq, C64};
use lksmult_bench::{riesz_green, three_squares};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("lks_weight");
    let coeffs = CoeffSeq::power(0.5, 1000).unwrap();
    for log2m in [14u32, 16, 18] {
        group.bench_with_input(BenchmarkId::from_parameter(log2m), &log2m, |b, &k| {
            b.iter(|| lks_weight(black_box(&coeffs), 1 << k).unwrap())
        });
    }
    group.finish();
}

fn capacities(c: &mut Criterion) {
    let g = riesz_green(0.5, 14);
    let mut group = c.benchmark_group("capacity");
    for len in [8i64, 64, 256] {
        let set: Vec<i64> = (0..len).map(|j| 2 * j).collect();
        for method in [CapacityMethod::ActiveSet, CapacityMethod::ProjectedGradient] {
            let id = BenchmarkId::new(format!("{method:?}"), len);
            group.bench_with_input(id, &set, |b, s| b.iter(|| capacity_value(black_box(s), &g, method, None).unwrap()));
        }
    }
    group.finish();
}

fn energy(c: &mut Criterion) {
    let g = riesz_green(0.5, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nu = random_nu(-6, 6, &mut rng);
    c.bench_function("energy_constant/all_subsets_13", |b| {
        b.iter(|| energy_constant(black_box(&nu), &g, &Strategy::AllSubsets { lo: -6, hi: 6 }).unwrap())
    });
}

fn singular(c: &mut Criterion) {
    let set = three_squares();
    c.bench_function("polygon_structure/12", |b| b.iter(|| polygon_structure(black_box(&set))));
    c.bench_function("composite_weight/2^16", |b| b.iter(|| composite_weight(black_box(&set), 1 << 16).unwrap()));
}

fn spectra(c: &mut Criterion) {
    let nu = NuMeasure::golden(1 << 14).unwrap();
    let id = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
    c.bench_function("resolvent_probe/N=64", |b| {
        b.iter(|| resolvent_probe(&id, &nu, black_box(C64::new(0.0, 0.0)), &[64]).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = weights, capacities, energy, singular, spectra
}
criterion_main!(benches);
