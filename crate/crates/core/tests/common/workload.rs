//! Synthetic positives for timing Levenshtein negative sampling at scale.
//!
//! Terms are 2 to 5 pseudo-words drawn with a skewed (Zipf-like) preference
//! for frequent words, as in clinical terminologies. Each group of three
//! terms (a base term and two lexical variants) forms a clique of positives,
//! so the nearest pool terms are often closure-similar and must be skipped.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termsim::datasetgen::{SimilarityClosure, TermPair};

const SYLLABLES: [&str; 24] = [
    "ka", "ro", "mi", "ne", "tu", "sa", "lo", "pe", "vi", "da", "gu", "ze", "bri", "ost", "ant",
    "el", "cor", "pha", "lin", "tra", "us", "em", "ix", "ol",
];

fn vocabulary(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(size);
    while words.len() < size {
        let n = rng.gen_range(2..=4);
        let w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

pub struct Workload {
    pub positives: Vec<TermPair>,
    pub closure: SimilarityClosure,
}

/// About `n_positives` positives over as many distinct terms.
pub fn generate(n_positives: usize, seed: u64) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(&mut rng, 3000);
    let word = |rng: &mut ChaCha8Rng| -> &str {
        let u: f64 = rng.gen();
        &vocab[(u.powi(3) * vocab.len() as f64) as usize]
    };
    let mut seen: HashSet<String> = HashSet::new();
    let mut groups: Vec<[String; 3]> = Vec::new();
    while groups.len() * 3 < n_positives {
        let len = rng.gen_range(2..=5);
        let base: Vec<&str> = (0..len).map(|_| word(&mut rng)).collect();
        let mut replaced = base.clone();
        let at = rng.gen_range(0..len);
        replaced[at] = word(&mut rng);
        let mut swapped = base.clone();
        swapped.swap(0, len - 1);
        swapped.push(word(&mut rng));
        let group = [base.join(" "), replaced.join(" "), swapped.join(" ")];
        if group.iter().all(|t| !seen.contains(t)) && group[0] != group[1] {
            seen.extend(group.iter().cloned());
            groups.push(group);
        }
    }
    let mut positives = Vec::with_capacity(groups.len() * 3);
    for [a, b, c] in &groups {
        positives.extend(TermPair::new(a.clone(), b.clone()));
        positives.extend(TermPair::new(a.clone(), c.clone()));
        positives.extend(TermPair::new(b.clone(), c.clone()));
    }
    positives.truncate(n_positives);
    let closure = SimilarityClosure::from_groups(groups.iter().map(|g| g.to_vec()));
    Workload { positives, closure }
}
