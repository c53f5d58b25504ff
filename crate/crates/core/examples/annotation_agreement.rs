//! Inter-annotator agreement and dataset-label quality against the
//! majority-vote ground truth.
//!
//!     cargo run --example annotation_agreement

use std::collections::HashMap;
use std::path::Path;

use termsim::evaluation::{agreement_metrics, load_annotations};

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let table = load_annotations(&fixtures.join("annotations.csv")).expect("annotations");
    println!(
        "{} items, {} annotators, alpha = {:.3}",
        table.items.len(),
        table.annotators.len(),
        table.alpha().expect("alpha defined")
    );

    let mut rdr = csv::Reader::from_path(fixtures.join("annotation_labels.csv")).unwrap();
    let labels: HashMap<String, u8> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    let dataset_labels: Vec<u8> = table.items.iter().map(|i| labels[i]).collect();
    let truth = table.ground_truth();

    for positive in [1, 0] {
        let r = agreement_metrics(&truth, &dataset_labels, positive).unwrap();
        println!(
            "positive label {positive}: accuracy {:.3}  recall {:.3}  precision {:.3}  (no majority on {:.0}% of items)",
            r.accuracy.unwrap_or(f64::NAN),
            r.recall.unwrap_or(f64::NAN),
            r.precision.unwrap_or(f64::NAN),
            r.nan_fraction * 100.0
        );
    }
}
