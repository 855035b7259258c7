//! Evaluator and mining-scan throughput.
//!
//! Two questions this suite answers:
//!
//! 1. how fast is the double-precision prefilter evaluator, per fraction
//!    (`fast_eval64`), which bounds the candidate budget any search can
//!    afford; and
//! 2. what the data-parallel scanning back-end buys over the sequential
//!    one at realistic batch sizes (build with `--no-default-features`
//!    to bench a binary without the parallel back-end at all).
//!
//! Run with `cargo bench -p kontinued`.  The parallel/sequential pair is
//! reported under `scan_batch/{parallel,sequential}/<n>` so the two can be
//! compared directly in the criterion report.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use kontinued::constdb::ConstDb;
use kontinued::miner::{self, SearchSpace};

/// Candidate prefilter depth used by the miner's default configuration.
const SCAN_DEPTH: u32 = 256;
/// Prefilter tolerance matching `MineConfig::default`.
const SCAN_TOL: f64 = 1e-9;

fn bench_fast_eval(c: &mut Criterion) {
    let space = SearchSpace::default_space();
    let candidates: Vec<_> = (0..1024).map(|i| miner::candidate(&space, 7, i)).collect();
    let mut group = c.benchmark_group("fast_eval64");
    group.throughput(Throughput::Elements(candidates.len() as u64));
    group.bench_function("depth256_batch1024", |b| {
        b.iter(|| {
            let mut acc = 0f64;
            for cf in &candidates {
                let (v, stable) = miner::fast_eval64(black_box(cf), SCAN_DEPTH);
                if stable {
                    acc += v.abs().min(1.0);
                }
            }
            black_box(acc)
        })
    });
    group.finish();
}

fn bench_scan_batch(c: &mut Criterion) {
    // a small database keeps the bench about scanning, not hashing
    let db = ConstDb::build_base(128).expect("base database builds");
    let space = SearchSpace::default_space();
    let mut group = c.benchmark_group("scan_batch");
    for n in [256u64, 2048, 16384] {
        group.throughput(Throughput::Elements(n));
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| {
                miner::scan_batch_sequential(&space, &db, 11, n, SCAN_DEPTH, SCAN_TOL)
            })
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| miner::scan_batch_parallel(&space, &db, 11, n, SCAN_DEPTH, SCAN_TOL))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fast_eval, bench_scan_batch);
criterion_main!(benches);
