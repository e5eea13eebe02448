use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kofn::encoding::{encode_fmu, UniformSeed};
use kofn::measures::{KOutOfN, Threshold};
use kofn::osss::verify_osss_exact;
use kofn::percolation::crossing::PivotalScratch;
use kofn::percolation::{ExplorationTree, RevealRecorder, TriangularBox};
use kofn::trees::{FixedOrderTree, TauVariant};

fn bench_sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_k_subset");
    for &(n, k) in &[(64usize, 32usize), (1024, 512), (4096, 2048), (4096, 8)] {
        let measure = KOutOfN::new(n, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ones = Vec::with_capacity(k);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}c{k}")),
            &measure,
            |b, m| {
                b.iter(|| {
                    m.sample_ones_into(&mut ones, &mut rng);
                    black_box(ones.len())
                })
            },
        );
    }
    group.finish();
}

fn bench_crossing_and_pivotal(c: &mut Criterion) {
    let mut group = c.benchmark_group("box_scan");
    for &r in &[16usize, 32, 64] {
        let grid = TriangularBox::new(r).unwrap();
        let n = grid.vertex_count();
        let measure = KOutOfN::new(n, n / 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut scratch = PivotalScratch::new(&grid);
        let mut ones = Vec::with_capacity(n / 2);
        group.bench_function(BenchmarkId::new("pivotal_count", r), |b| {
            b.iter(|| {
                measure.sample_ones_into(&mut ones, &mut rng);
                scratch.load_ones(&ones);
                black_box(scratch.count_zero_pivotal(&grid, None))
            })
        });
    }
    group.finish();
}

fn bench_exploration(c: &mut Criterion) {
    let mut group = c.benchmark_group("exploration_walk");
    for &r in &[16usize, 32] {
        let grid = TriangularBox::new(r).unwrap();
        let n = grid.vertex_count();
        let measure = KOutOfN::new(n, n / 2).unwrap();
        let tree = ExplorationTree::new(grid, grid.index(r - 1, r / 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut recorder = RevealRecorder::new(n);
        let mut occupied = vec![false; n];
        let mut ones = Vec::with_capacity(n / 2);
        group.bench_function(BenchmarkId::from_parameter(r), |b| {
            b.iter(|| {
                measure.sample_ones_into(&mut ones, &mut rng);
                occupied.fill(false);
                for &v in &ones {
                    occupied[v] = true;
                }
                black_box(tree.run_on(&occupied, &mut recorder).unwrap())
            })
        });
    }
    group.finish();
}

fn bench_encode(c: &mut Criterion) {
    let measure = KOutOfN::new(512, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    c.bench_function("encode_fmu_512", |b| {
        b.iter(|| {
            let seed = UniformSeed::from_rng(512, &mut rng);
            black_box(encode_fmu(&measure, &seed).unwrap())
        })
    });
}

fn bench_exact_osss(c: &mut Criterion) {
    let n = 12;
    let measure = KOutOfN::new(n, 6).unwrap();
    let event = Threshold::new(n, (0..n - 1).collect(), 6).unwrap();
    let tree = FixedOrderTree::new((0..n).collect()).unwrap();
    c.bench_function("verify_osss_exact_n12", |b| {
        b.iter(|| {
            black_box(verify_osss_exact(&event, &tree, &measure, TauVariant::Standard).unwrap())
        })
    });
}

criterion_group!(
    benches,
    bench_sampler,
    bench_crossing_and_pivotal,
    bench_exploration,
    bench_encode,
    bench_exact_osss
);
criterion_main!(benches);
