//! Frozen facts about the synthetic fixture, checked through the library.

use std::path::{Path, PathBuf};

use termsim::categorysep::{avg_category_similarity, read_category_file, CategoryPartition};
use termsim::embeddings::{
    coverage_report, covered_subset, load_term_vectors, load_word_vectors_text, tokenize,
    WordEmbedding,
};
use termsim::evaluation::{load_annotations, load_graded_csv, Vote};
use termsim::ontology::{
    parse_release, IdMapping, ParseReport, ReleasePaths, MODEL_COMPONENT_MODULE,
};
use termsim::simmetrics::{BaseMetric, MetricSpec};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn toy(name: &str) -> WordEmbedding {
    let file = match name {
        "toy-a" => "toy_a.txt",
        "toy-b" => "toy_b.txt",
        _ => unreachable!(),
    };
    load_word_vectors_text(&fixtures().join("embeddings").join(file), name).unwrap()
}

#[test]
fn release_counts_are_frozen() {
    let root = fixtures().join("ontology");
    let paths = ReleasePaths {
        concepts: root.join("concepts.tsv"),
        descriptions: root.join("descriptions.tsv"),
        associations: root.join("associations.tsv"),
    };
    let (snapshot, report) = parse_release(&paths, &IdMapping::default()).unwrap();
    assert_eq!(
        report,
        ParseReport {
            concept_rows: 189,
            description_rows: 372,
            association_rows: 58,
            ignored_description_rows: 0,
            ignored_association_rows: 1,
        }
    );
    assert_eq!(snapshot.concept_count(), 185);
    assert_eq!(snapshot.description_count(), 370);
    assert_eq!(snapshot.associations().len(), 57);

    let core = snapshot.exclude_module(MODEL_COMPONENT_MODULE);
    assert_eq!(core.concept_count(), 180);
    assert_eq!(core.description_count(), 360);
    assert_eq!(core.associations().len(), 56);
}

#[test]
fn graded_coverage_matches_hand_count() {
    let graded = load_graded_csv(&fixtures().join("graded.csv"), "graded", None).unwrap();
    let (a, b) = (toy("toy-a"), toy("toy-b"));
    let terms =
        load_term_vectors(&fixtures().join("embeddings/toy_terms.tsv"), "toy-terms").unwrap();

    let datasets = vec![(graded.name.clone(), graded.pairs.clone())];
    let counts: Vec<(String, usize, usize)> = coverage_report(&datasets, &[&a, &b, &terms])
        .into_iter()
        .map(|r| (r.embedding, r.covered, r.total))
        .collect();
    assert_eq!(
        counts,
        vec![
            ("toy-a".to_string(), 30, 30),
            ("toy-b".to_string(), 27, 30),
            ("toy-terms".to_string(), 30, 30),
        ]
    );

    // toy-b lacks "paludism", "cephalalgia" and "sacral".
    let all = covered_subset(&graded.pairs, &[&a, &b, &terms]);
    assert_eq!(all.indices.len(), 27);
    let dropped: Vec<&str> = (0..graded.pairs.len())
        .filter(|i| !all.indices.contains(i))
        .map(|i| graded.pairs[i].1.as_str())
        .collect();
    assert_eq!(dropped, ["Paludism", "Cephalalgia", "Sacrum sprain"]);
}

fn mean_vector(emb: &WordEmbedding, term: &str) -> Vec<f64> {
    let tokens = tokenize(term);
    let mut acc = vec![0.0; emb.dim()];
    for t in &tokens {
        for (x, v) in acc.iter_mut().zip(emb.vector(t).unwrap()) {
            *x += v;
        }
    }
    acc.iter().map(|x| x / tokens.len() as f64).collect()
}

fn cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    dot / (u.iter().map(|a| a * a).sum::<f64>().sqrt()
        * v.iter().map(|a| a * a).sum::<f64>().sqrt())
}

#[test]
fn category_means_match_enumeration() {
    let read = |f: &str| read_category_file(&fixtures().join("categories").join(f)).unwrap();
    let (dp, tp, org) = (
        read("diagnostic_procedure.txt"),
        read("therapeutic_procedure.txt"),
        read("organism.txt"),
    );
    assert_eq!((dp.len(), tp.len(), org.len()), (10, 10, 10));
    let emb = toy("toy-a");
    let partition = CategoryPartition::new(dp.clone(), tp.clone(), org.clone());
    let means =
        avg_category_similarity(&partition, &emb, MetricSpec::Avg(BaseMetric::Cos)).unwrap();

    let cross = |xs: &[String], ys: &[String]| {
        let mut s = 0.0;
        for x in xs {
            for y in ys {
                s += cos(&mean_vector(&emb, x), &mean_vector(&emb, y));
            }
        }
        s / (xs.len() * ys.len()) as f64
    };
    let within = |xs: &[String]| {
        let (mut s, mut n) = (0.0, 0);
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                s += cos(&mean_vector(&emb, &xs[i]), &mean_vector(&emb, &xs[j]));
                n += 1;
            }
        }
        s / n as f64
    };
    assert!((means.close_a_close_b - cross(&dp, &tp)).abs() < 1e-12);
    assert!((means.close_a_distant - cross(&dp, &org)).abs() < 1e-12);
    assert!((means.close_a_within.unwrap() - within(&dp)).abs() < 1e-12);
    assert!((means.close_b_within.unwrap() - within(&tp)).abs() < 1e-12);
    assert!((means.distant_within.unwrap() - within(&org)).abs() < 1e-12);
    // The toy space keeps the two procedure categories closer than organisms.
    assert!(means.close_a_close_b > means.close_a_distant);
}

#[test]
fn annotation_sample_agreement() {
    let table = load_annotations(&fixtures().join("annotations.csv")).unwrap();
    assert_eq!(table.items.len(), 20);
    assert_eq!(table.annotators.len(), 3);
    let dont_know = table
        .cells
        .iter()
        .flatten()
        .filter(|v| **v == Some(Vote::DontKnow))
        .count();
    assert_eq!(dont_know, 4);
    // Coincidence-matrix value computed by hand from the 20 x 3 table.
    assert!((table.alpha().unwrap() - 0.788_461_538_461_538_4).abs() < 1e-12);
    let truth = table.ground_truth();
    assert!(truth[..10].iter().all(|t| *t == 1.0));
    assert!(truth[10..].iter().all(|t| *t == 0.0));
}
