use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use minimax_bench::fixture;
use minimax_core::{
    epoch_seg, rain, seg, EpochSegParams, HalfPointSelection, RainParams, SegParams, StochasticOracle,
};

fn oracle_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_eval");
    for half in [2, 4, 16] {
        let (p, z) = fixture(half);
        for sigma in [0.0, 1.0] {
            let mut oracle = StochasticOracle::seeded(sigma, 0, 0).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("sigma={sigma}"), 2 * half), &z, |b, z| {
                b.iter(|| oracle.eval(&p, black_box(z)).unwrap())
            });
        }
    }
    group.finish();
}

fn seg_run(c: &mut Criterion) {
    let (p, z0) = fixture(4);
    let params = SegParams { eta: 1.0 / 32.0, iterations: 1000 };
    let mut group = c.benchmark_group("seg");
    group.throughput(Throughput::Elements(2 * params.iterations));
    group.bench_function("d=8,T=1000", |b| {
        b.iter(|| {
            let mut oracle = StochasticOracle::seeded(1.0, 0, 0).unwrap();
            seg(&mut oracle, &p, &z0, params, &mut HalfPointSelection::uniform(0, 0)).unwrap()
        })
    });
    group.finish();
}

fn epoch_seg_run(c: &mut Criterion) {
    let (p, z0) = fixture(4);
    let params = EpochSegParams { mu: 1.0, lipschitz: 8.0, n: 4, k: 3 };
    c.bench_function("epoch_seg/d=8,N=4,K=3", |b| {
        b.iter(|| {
            let mut oracle = StochasticOracle::seeded(1.0, 0, 0).unwrap();
            epoch_seg(&mut oracle, &p, &z0, params, &mut HalfPointSelection::uniform(0, 0)).unwrap()
        })
    });
}

fn rain_run(c: &mut Criterion) {
    let (p, z0) = fixture(2);
    let params = RainParams { mu: 1.0, lipschitz: 8.0, eps: 3.0, distance: 1.0, sigma: 0.5 };
    let mut group = c.benchmark_group("rain");
    group.sample_size(10);
    group.bench_function("d=4,eps=3,sigma=0.5", |b| {
        b.iter(|| {
            let mut oracle = StochasticOracle::seeded(0.5, 0, 0).unwrap();
            rain(&mut oracle, &p, &z0, params, &mut HalfPointSelection::uniform(0, 0)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, oracle_eval, seg_run, epoch_seg_run, rain_run);
criterion_main!(benches);
