//! Correlates metrics with graded gold scores and tests every pair of
//! metrics for a significant difference (BCa bootstrap, Bonferroni).
//!
//!     cargo run --release --example significance -- [resamples]

use std::path::Path;

use termsim::embeddings::{covered_subset, load_word_vectors_text};
use termsim::evaluation::{
    load_graded_csv, significance_matrix, spearman_correlation, BootstrapConfig, SignificanceMode,
};
use termsim::simmetrics::{score_pairs, MetricSpec};

fn main() {
    let resamples = std::env::args()
        .nth(1)
        .map_or(2000, |s| s.parse().expect("resamples"));
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let emb = load_word_vectors_text(&fixtures.join("embeddings/toy_a.txt"), "toy-a").unwrap();
    let graded = load_graded_csv(&fixtures.join("graded.csv"), "graded", Some((0.0, 4.0))).unwrap();

    // Only pairs every metric can score.
    let covered = covered_subset(&graded.pairs, &[&emb]);
    println!(
        "{} of {} graded pairs covered",
        covered.indices.len(),
        covered.total
    );
    let pairs: Vec<_> = covered
        .indices
        .iter()
        .map(|&i| graded.pairs[i].clone())
        .collect();
    let gold: Vec<f64> = covered.indices.iter().map(|&i| graded.scores[i]).collect();

    let metrics = MetricSpec::ALL;
    let rows = score_pairs(&pairs, &emb, &metrics);
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (m, metric) in metrics.iter().enumerate() {
        let column: Option<Vec<f64>> = rows.iter().map(|r| r[m].value()).collect();
        let Some(column) = column else {
            println!("{metric}: undefined on some pair, skipped");
            continue;
        };
        let rho = spearman_correlation(&column, &gold).unwrap();
        println!("{metric:>8}: rho = {rho:.3}");
        names.push(metric.name());
        columns.push(column);
    }

    let mode = SignificanceMode::Correlation(BootstrapConfig {
        resamples,
        alpha: 0.05,
        seed: 7,
    });
    let matrix = significance_matrix(&names, &columns, &gold, mode, 0.05).unwrap();
    println!(
        "\n{} comparisons at per-test alpha {:.2e}",
        names.len() * (names.len() - 1) / 2,
        matrix.per_test_alpha
    );
    for (i, name) in names.iter().enumerate() {
        println!(
            "{name:>8}: better than {:>2}, worse than {:>2}",
            matrix.better_count(i),
            matrix.worse_count(i)
        );
    }
}
