//! Times Levenshtein negative sampling on a synthetic workload.
//!
//!     cargo run --release --example levenshtein_benchmark -- [positives] [threads]
//!
//! Defaults to 100,000 positives over a 100,000-term pool and all cores.

#[path = "../tests/common/workload.rs"]
mod workload;

use std::time::Instant;

use termsim::datasetgen::{sample_negatives_levenshtein, term_pool};
use termsim::strings::EditDistanceIndex;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args
        .next()
        .map_or(100_000, |a| a.parse().expect("positives"));
    let threads: usize = args.next().map_or(0, |a| a.parse().expect("threads"));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .unwrap();

    let t = Instant::now();
    let w = workload::generate(n, 14);
    let pool = term_pool(&w.positives);
    println!(
        "workload: {} positives, {} pool terms ({:.1?})",
        w.positives.len(),
        pool.len(),
        t.elapsed()
    );

    let t = Instant::now();
    let index = EditDistanceIndex::build(pool.iter().cloned()).expect("non-empty pool");
    println!("index build: {:.1?}", t.elapsed());

    let t = Instant::now();
    let negatives =
        sample_negatives_levenshtein(&w.positives, &w.closure, &index).expect("sampling");
    let elapsed = t.elapsed();
    let mean = negatives.iter().map(|p| p.distance).sum::<usize>() as f64 / negatives.len() as f64;
    println!(
        "sampling: {} negatives in {:.1?} on {} thread(s); mean distance {mean:.2}",
        negatives.len(),
        elapsed,
        rayon::current_num_threads()
    );
}
