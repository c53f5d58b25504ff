//! Scores a few term pairs with every similarity metric.
//!
//!     cargo run --example score_metrics

use std::path::Path;

use termsim::embeddings::load_word_vectors_text;
use termsim::simmetrics::{score_pairs, MetricSpec};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/embeddings/toy_a.txt");
    let emb = load_word_vectors_text(&path, "toy-a").expect("embedding loads");
    println!("{}: {} words, dim {}", path.display(), emb.len(), emb.dim());

    let pairs = [
        ("Heart attack", "Myocardial infarction"),
        ("Kidney stone", "Nephrolithiasis"),
        ("Sacrum sprain", "Sacral sprain"),
        ("Heart attack", "Kidney stone"),
    ];
    let metrics = MetricSpec::ALL;
    let scores = score_pairs(&pairs, &emb, &metrics);

    print!("{:<44}", "pair");
    for m in &metrics {
        print!("{:>9}", m.name());
    }
    println!();
    for ((a, b), row) in pairs.iter().zip(&scores) {
        print!("{:<44}", format!("{a} / {b}"));
        for s in row {
            match s.value() {
                Some(v) => print!("{v:>9.3}"),
                None => print!("{:>9}", s.to_string()),
            }
        }
        println!();
    }
}
