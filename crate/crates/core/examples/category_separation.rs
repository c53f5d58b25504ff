//! Overlap error and category-average similarities for the fixture's
//! diagnostic procedure / therapeutic procedure / organism lists.
//!
//!     cargo run --example category_separation

use std::path::Path;

use termsim::categorysep::{
    avg_category_similarity, overlap_error, read_category_file, CategoryPartition,
};
use termsim::embeddings::load_word_vectors_text;
use termsim::simmetrics::MetricSpec;

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let read = |name: &str| {
        read_category_file(&fixtures.join("categories").join(name)).expect("category file")
    };
    let partition = CategoryPartition::new(
        read("diagnostic_procedure.txt"),
        read("therapeutic_procedure.txt"),
        read("organism.txt"),
    );
    let emb = load_word_vectors_text(&fixtures.join("embeddings/toy_a.txt"), "toy-a").unwrap();

    println!(
        "{:>8} {:>6} {:>8} {:>8} {:>8}",
        "metric", "#O", "O", "DP-TP", "DP-Org"
    );
    for metric in MetricSpec::ALL {
        let o = overlap_error(&partition, &emb, metric).expect("overlap");
        let means = avg_category_similarity(&partition, &emb, metric).expect("means");
        println!(
            "{:>8} {:>6} {:>8.3} {:>8.3} {:>8.3}",
            metric.name(),
            o.raw_count,
            o.relative,
            means.close_a_close_b,
            means.close_a_distant
        );
    }
}
