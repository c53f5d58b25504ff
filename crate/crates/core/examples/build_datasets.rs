//! Builds the similarity benchmarks for one family of the fixture ontology
//! and prints their statistics.
//!
//!     cargo run --example build_datasets -- [family] [seed]

use std::path::Path;

use termsim::datasetgen::{dataset_stats, Family, FamilyContext, NegStrategy, Split, SplitSpec};
use termsim::ontology::{parse_release, IdMapping, ReleasePaths, MODEL_COMPONENT_MODULE};

fn main() {
    let mut args = std::env::args().skip(1);
    let family = args.next().unwrap_or_else(|| "fsn-syn".into());
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed"));
    let family = Family::ALL
        .into_iter()
        .find(|f| f.name() == family)
        .unwrap_or_else(|| panic!("unknown family {family}"));

    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ontology");
    let paths = ReleasePaths {
        concepts: root.join("concepts.tsv"),
        descriptions: root.join("descriptions.tsv"),
        associations: root.join("associations.tsv"),
    };
    let (snapshot, report) = parse_release(&paths, &IdMapping::default()).expect("fixture parses");
    let snapshot = snapshot.exclude_module(MODEL_COMPONENT_MODULE);
    println!("{report:?}");

    let ctx = FamilyContext::new(&snapshot, family);
    println!(
        "{family}: {} positives, pool of {} terms",
        ctx.positives.len(),
        ctx.pool.len()
    );
    for split in [Split::Easy, Split::Hard] {
        let build = |strategy| {
            ctx.assemble(split, strategy, seed, SplitSpec::default())
                .expect("dataset builds")
        };
        let random = build(NegStrategy::Random);
        let lev = build(NegStrategy::Levenshtein);
        random.check().expect("valid dataset");
        lev.check().expect("valid dataset");
        let s = dataset_stats(&[&random], &[&lev]);
        println!(
            "{split:>5}: size {:>4}  pos {:>6.2}  neg-random {:>6.2}  neg-levenshtein {:>6.2}",
            s.size,
            s.avg_lev_pos.unwrap_or(f64::NAN),
            s.avg_lev_neg_random.unwrap_or(f64::NAN),
            s.avg_lev_neg_levenshtein.unwrap_or(f64::NAN),
        );
        for p in lev.negatives().take(3) {
            println!(
                "        {} / {} (distance {})",
                p.pair.term_a, p.pair.term_b, p.distance
            );
        }
    }
}
