//! Dataset coverage per embedding, the subset covered by all of them, and
//! pairwise vocabulary overlap.
//!
//!     cargo run --example coverage

use std::path::Path;

use termsim::embeddings::{
    coverage_report, covered_subset, load_term_vectors, load_word_vectors_text, vocab_overlap,
};
use termsim::evaluation::load_graded_csv;

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let toy_a = load_word_vectors_text(&fixtures.join("embeddings/toy_a.txt"), "toy-a").unwrap();
    let toy_b = load_word_vectors_text(&fixtures.join("embeddings/toy_b.txt"), "toy-b").unwrap();
    let terms = load_term_vectors(&fixtures.join("embeddings/toy_terms.tsv"), "toy-terms").unwrap();
    let embeddings = [&toy_a, &toy_b, &terms];

    let graded = load_graded_csv(&fixtures.join("graded.csv"), "graded", None).unwrap();
    let datasets = vec![(graded.name.clone(), graded.pairs.clone())];
    for row in coverage_report(&datasets, &embeddings) {
        println!(
            "{:<10} {:<8} {:>3}/{:<3} {:>6.1}%",
            row.embedding,
            row.dataset,
            row.covered,
            row.total,
            row.percent()
        );
    }
    let all = covered_subset(&graded.pairs, &embeddings);
    println!("covered by all: {}/{}", all.indices.len(), all.total);

    println!("\nvocabulary overlap (% of row vocabulary in column)");
    for row in &embeddings[..2] {
        let cells: Vec<String> = embeddings[..2]
            .iter()
            .map(|col| format!("{:>7.1}", vocab_overlap(row, col)))
            .collect();
        println!("{:<8}{}", row.name, cells.join(""));
    }
}
