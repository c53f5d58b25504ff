//! Benchmark construction: positive extraction, easy/hard split, negative
//! sampling, and the dataset TSV format.
//!
//! A dataset is fully determined by (family, split, strategy, seed,
//! threshold, snapshot). Sampling runs data-parallel but every random draw
//! comes from a per-positive ChaCha stream and duplicate resolution happens in
//! a sequential merge, so the thread count never changes the output.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{AssociationKind, OntologySnapshot, TermError};
use crate::strings::{levenshtein, pairing_key, EditDistanceIndex, Neighbor};

pub const GENERATOR: &str = concat!("termsim ", env!("CARGO_PKG_VERSION"));

/// Random draws tried per positive before falling back to a shuffled scan.
pub const RANDOM_DRAW_BUDGET: usize = 1000;

/// Positives at this edit distance or below are "easy".
pub const DEFAULT_THRESHOLD: usize = 5;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("no random negative available for positive ({0}, {1})")]
    NoRandomNegative(String, String),
    #[error("term pool exhausted while sampling a Levenshtein negative for ({0}, {1})")]
    PoolExhausted(String, String),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    FsnSyn,
    SynSyn,
    PossEquivTo,
    ReplacedBy,
    SameAs,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::FsnSyn,
        Family::SynSyn,
        Family::PossEquivTo,
        Family::ReplacedBy,
        Family::SameAs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::FsnSyn => "fsn-syn",
            Family::SynSyn => "syn-syn",
            Family::PossEquivTo => "poss-equiv-to",
            Family::ReplacedBy => "replaced-by",
            Family::SameAs => "same-as",
        }
    }

    pub fn association_kind(self) -> Option<AssociationKind> {
        match self {
            Family::PossEquivTo => Some(AssociationKind::PossiblyEquivalentTo),
            Family::ReplacedBy => Some(AssociationKind::ReplacedBy),
            Family::SameAs => Some(AssociationKind::SameAs),
            Family::FsnSyn | Family::SynSyn => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Easy,
    Hard,
    All,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Easy => "easy",
            Split::Hard => "hard",
            Split::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegStrategy {
    Random,
    Levenshtein,
}

impl NegStrategy {
    pub const ALL: [NegStrategy; 2] = [NegStrategy::Random, NegStrategy::Levenshtein];

    pub fn name(self) -> &'static str {
        match self {
            NegStrategy::Random => "random",
            NegStrategy::Levenshtein => "levenshtein",
        }
    }
}

macro_rules! name_impls {
    ($ty:ty, $all:expr, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $all.into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!(concat!("unknown ", $what, " `{}`"), s))
            }
        }
    };
}

name_impls!(Family, Family::ALL, "dataset family");
name_impls!(Split, [Split::Easy, Split::Hard, Split::All], "split");
name_impls!(NegStrategy, NegStrategy::ALL, "negative strategy");

/// Order-insensitive, case-insensitive identity of a pair.
pub type CanonicalKey = (String, String);

fn canonical(a_key: &str, b_key: &str) -> CanonicalKey {
    if a_key <= b_key {
        (a_key.to_string(), b_key.to_string())
    } else {
        (b_key.to_string(), a_key.to_string())
    }
}

/// Two normalized terms; `term_a` is the "first term" negatives are anchored on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermPair {
    pub term_a: String,
    pub term_b: String,
}

impl TermPair {
    /// `None` when the terms are equal under pairing-equality.
    pub fn new(term_a: impl Into<String>, term_b: impl Into<String>) -> Option<Self> {
        let (term_a, term_b) = (term_a.into(), term_b.into());
        (pairing_key(&term_a) != pairing_key(&term_b)).then_some(TermPair { term_a, term_b })
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical(&pairing_key(&self.term_a), &pairing_key(&self.term_b))
    }

    pub fn distance(&self) -> usize {
        levenshtein(&self.term_a, &self.term_b)
    }
}

pub const SIMILAR: u8 = 1;
pub const DISSIMILAR: u8 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPair {
    pub pair: TermPair,
    pub label: u8,
    pub distance: usize,
}

impl LabeledPair {
    pub fn new(pair: TermPair, label: u8) -> Self {
        let distance = pair.distance();
        LabeledPair {
            pair,
            label,
            distance,
        }
    }
}

/// Adds `pair` unless its canonical key was already seen.
fn push_unique(out: &mut Vec<TermPair>, seen: &mut HashSet<CanonicalKey>, pair: TermPair) {
    if seen.insert(pair.canonical_key()) {
        out.push(pair);
    }
}

/// Orders terms by (lowercase form, raw form).
fn term_order(a: &str, b: &str) -> std::cmp::Ordering {
    pairing_key(a).cmp(&pairing_key(b)).then_with(|| a.cmp(b))
}

/// (FSN, synonym) pairs of every active concept.
pub fn extract_fsn_synonym(snapshot: &OntologySnapshot) -> Vec<TermPair> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for concept in snapshot.concepts().filter(|c| c.active) {
        let fsn = match snapshot.fsn_of(concept.id) {
            Ok(t) => t,
            Err(e) => {
                warn!("{e}; concept skipped");
                continue;
            }
        };
        for syn in snapshot.active_synonyms(concept.id) {
            if let Some(p) = TermPair::new(fsn.clone(), syn) {
                push_unique(&mut out, &mut seen, p);
            }
        }
    }
    out
}

/// FSN–synonym pairs plus every unordered synonym–synonym pair within a
/// concept, the smaller synonym first.
pub fn extract_synonym_synonym(snapshot: &OntologySnapshot) -> Vec<TermPair> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for p in extract_fsn_synonym(snapshot) {
        push_unique(&mut out, &mut seen, p);
    }
    for concept in snapshot.concepts().filter(|c| c.active) {
        if snapshot.fsn_of(concept.id).is_err() {
            continue;
        }
        let syns = snapshot.active_synonyms(concept.id);
        for (i, a) in syns.iter().enumerate() {
            for b in &syns[i + 1..] {
                let (first, second) = if term_order(a, b).is_le() {
                    (a, b)
                } else {
                    (b, a)
                };
                if let Some(p) = TermPair::new(first.clone(), second.clone()) {
                    push_unique(&mut out, &mut seen, p);
                }
            }
        }
    }
    out
}

/// (FSN of source, FSN of target) for active associations of `kind`.
pub fn extract_association_pairs(
    snapshot: &OntologySnapshot,
    kind: AssociationKind,
) -> Vec<TermPair> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for assoc in snapshot
        .associations()
        .iter()
        .filter(|a| a.active && a.kind == kind)
    {
        let resolve = |id| match snapshot.fsn_of(id) {
            Ok(t) => Some(t),
            Err(e @ TermError::UnknownConcept(_)) => {
                debug!("association {}: {e}; skipped", assoc.id);
                None
            }
            Err(e) => {
                warn!("association {}: {e}; skipped", assoc.id);
                None
            }
        };
        let (Some(a), Some(b)) = (resolve(assoc.source), resolve(assoc.target)) else {
            continue;
        };
        if let Some(p) = TermPair::new(a, b) {
            push_unique(&mut out, &mut seen, p);
        }
    }
    out
}

pub fn extract_family(snapshot: &OntologySnapshot, family: Family) -> Vec<TermPair> {
    match family.association_kind() {
        Some(kind) => extract_association_pairs(snapshot, kind),
        None if family == Family::FsnSyn => extract_fsn_synonym(snapshot),
        None => extract_synonym_synonym(snapshot),
    }
}

/// Easy/hard boundary on edit distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub threshold: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Partitions positives into (distance <= threshold, distance > threshold).
pub fn split_easy_hard(pairs: &[TermPair], spec: SplitSpec) -> (Vec<TermPair>, Vec<TermPair>) {
    let distances: Vec<usize> = pairs.par_iter().map(TermPair::distance).collect();
    let mut easy = Vec::new();
    let mut hard = Vec::new();
    for (p, d) in pairs.iter().zip(distances) {
        if d <= spec.threshold {
            easy.push(p.clone());
        } else {
            hard.push(p.clone());
        }
    }
    (easy, hard)
}

/// Equivalence classes of "similar" terms under pairing-equality.
#[derive(Debug, Clone, Default)]
pub struct SimilarityClosure {
    node_of: HashMap<String, u32>,
    class: Vec<u32>,
}

impl SimilarityClosure {
    /// Merges every group into one class (pairs are groups of two).
    pub fn from_groups<G, T>(groups: G) -> Self
    where
        G: IntoIterator<Item = T>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        let mut node_of: HashMap<String, u32> = HashMap::new();
        let mut parent: Vec<u32> = Vec::new();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let grand = parent[parent[x as usize] as usize];
                parent[x as usize] = grand;
                x = grand;
            }
            x
        }
        for group in groups {
            let mut first: Option<u32> = None;
            for term in group {
                let key = pairing_key(term.as_ref());
                let next = node_of.len() as u32;
                let node = *node_of.entry(key).or_insert_with(|| {
                    parent.push(next);
                    next
                });
                match first {
                    None => first = Some(node),
                    Some(f) => {
                        let (ra, rb) = (find(&mut parent, f), find(&mut parent, node));
                        if ra != rb {
                            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                            parent[hi as usize] = lo;
                        }
                    }
                }
            }
        }
        let class = (0..parent.len() as u32)
            .map(|x| find(&mut parent, x))
            .collect();
        SimilarityClosure { node_of, class }
    }

    pub fn class_of(&self, term: &str) -> Option<u32> {
        self.class_of_key(&pairing_key(term))
    }

    fn class_of_key(&self, key: &str) -> Option<u32> {
        self.node_of.get(key).map(|&n| self.class[n as usize])
    }

    /// Same pairing key, or same closure class.
    pub fn similar(&self, a: &str, b: &str) -> bool {
        let (ka, kb) = (pairing_key(a), pairing_key(b));
        ka == kb
            || matches!((self.class_of_key(&ka), self.class_of_key(&kb)), (Some(x), Some(y)) if x == y)
    }

    pub fn term_count(&self) -> usize {
        self.node_of.len()
    }
}

/// Closure over the family's positives plus, for every concept, its FSN and
/// active synonyms as one group.
pub fn build_similarity_closure(
    family_pairs: &[TermPair],
    snapshot: &OntologySnapshot,
) -> SimilarityClosure {
    let concept_groups = snapshot.concepts().map(|c| snapshot.concept_terms(c.id));
    let pair_groups = family_pairs
        .iter()
        .map(|p| vec![p.term_a.clone(), p.term_b.clone()]);
    SimilarityClosure::from_groups(pair_groups.chain(concept_groups))
}

/// Distinct terms of the pairs, sorted in tie-break order.
pub fn term_pool(pairs: &[TermPair]) -> Vec<String> {
    let mut pool: Vec<String> = pairs
        .iter()
        .flat_map(|p| [p.term_a.clone(), p.term_b.clone()])
        .collect();
    pool.sort_by(|a, b| term_order(a, b));
    pool.dedup();
    pool
}

fn positive_stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One random negative per positive: (first term, uniformly drawn pool term),
/// rejecting closure-similar terms and pairs already produced.
pub fn sample_negatives_random(
    positives: &[TermPair],
    pool: &[String],
    closure: &SimilarityClosure,
    seed: u64,
) -> Result<Vec<LabeledPair>, GenError> {
    let mut pool: Vec<&String> = pool.iter().collect();
    pool.sort_by(|a, b| term_order(a, b));
    pool.dedup();

    struct Draw {
        rng: ChaCha8Rng,
        draws: usize,
        candidate: Option<usize>,
    }

    let legal = |first: &str, cand: &str| !closure.similar(first, cand);
    let draw_next =
        |rng: &mut ChaCha8Rng, draws: &mut usize, first: &str, extra: &dyn Fn(&str) -> bool| {
            while *draws < RANDOM_DRAW_BUDGET && !pool.is_empty() {
                *draws += 1;
                let i = rng.gen_range(0..pool.len());
                if legal(first, pool[i]) && extra(pool[i]) {
                    return Some(i);
                }
            }
            None
        };

    // Parallel phase: closure-legal proposals, each from its own stream.
    let proposals: Vec<Draw> = positives
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = positive_stream(seed, i);
            let mut draws = 0;
            let candidate = draw_next(&mut rng, &mut draws, &p.term_a, &|_| true);
            Draw {
                rng,
                draws,
                candidate,
            }
        })
        .collect();

    // Sequential merge in positive order resolves in-run duplicates.
    let mut used: HashSet<CanonicalKey> = HashSet::new();
    let mut out = Vec::with_capacity(positives.len());
    for (p, mut d) in positives.iter().zip(proposals) {
        let first_key = pairing_key(&p.term_a);
        let unused = |cand: &str, used: &HashSet<CanonicalKey>| {
            !used.contains(&canonical(&first_key, &pairing_key(cand)))
        };
        let mut choice = d.candidate.filter(|&i| unused(pool[i], &used));
        if choice.is_none() {
            choice = draw_next(&mut d.rng, &mut d.draws, &p.term_a, &|c| unused(c, &used));
        }
        if choice.is_none() {
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.shuffle(&mut d.rng);
            choice = order
                .into_iter()
                .find(|&i| legal(&p.term_a, pool[i]) && unused(pool[i], &used));
        }
        let Some(i) = choice else {
            return Err(GenError::NoRandomNegative(
                p.term_a.clone(),
                p.term_b.clone(),
            ));
        };
        let pair = TermPair {
            term_a: p.term_a.clone(),
            term_b: pool[i].clone(),
        };
        used.insert(pair.canonical_key());
        out.push(LabeledPair::new(pair, DISSIMILAR));
    }
    Ok(out)
}

/// One negative per positive: the first term paired with its nearest
/// (Levenshtein) pool term that is not closure-similar and not already used.
pub fn sample_negatives_levenshtein(
    positives: &[TermPair],
    closure: &SimilarityClosure,
    index: &EditDistanceIndex,
) -> Result<Vec<LabeledPair>, GenError> {
    let class_of_id: Vec<Option<u32>> = (0..index.len() as u32)
        .map(|id| closure.class_of_key(index.key(id)))
        .collect();
    let admissible = |query_key: &str, query_class: Option<u32>, id: u32| {
        index.key(id) != query_key
            && (query_class.is_none() || class_of_id[id as usize] != query_class)
    };

    // Positives sharing a first term need that many distinct neighbours.
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in positives.iter().enumerate() {
        groups.entry(p.term_a.as_str()).or_default().push(i);
    }
    let groups: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
    let neighbours: Vec<Vec<Neighbor>> = groups
        .par_iter()
        .map(|(first, members)| {
            let key = pairing_key(first);
            let class = closure.class_of_key(&key);
            index.k_nearest_where(first, members.len(), |id| admissible(&key, class, id))
        })
        .collect();
    let mut slot_of = vec![(0usize, 0usize); positives.len()];
    for (g, (_, members)) in groups.iter().enumerate() {
        for &i in members {
            slot_of[i] = (g, 0);
        }
    }
    let mut cursor = vec![0usize; groups.len()];

    let mut used: HashSet<CanonicalKey> = HashSet::new();
    let mut out = Vec::with_capacity(positives.len());
    for (i, p) in positives.iter().enumerate() {
        let (g, _) = slot_of[i];
        let first_key = pairing_key(&p.term_a);
        let mut chosen: Option<Neighbor> = None;
        while cursor[g] < neighbours[g].len() {
            let n = neighbours[g][cursor[g]];
            cursor[g] += 1;
            if !used.contains(&canonical(&first_key, index.key(n.id))) {
                chosen = Some(n);
                break;
            }
        }
        if chosen.is_none() {
            let class = closure.class_of_key(&first_key);
            chosen = index
                .k_nearest_where(&p.term_a, 1, |id| {
                    admissible(&first_key, class, id)
                        && !used.contains(&canonical(&first_key, index.key(id)))
                })
                .first()
                .copied();
        }
        let Some(n) = chosen else {
            return Err(GenError::PoolExhausted(p.term_a.clone(), p.term_b.clone()));
        };
        let pair = TermPair {
            term_a: p.term_a.clone(),
            term_b: index.term(n.id).to_string(),
        };
        used.insert(pair.canonical_key());
        out.push(LabeledPair {
            pair,
            label: DISSIMILAR,
            distance: n.distance,
        });
    }
    Ok(out)
}

/// A balanced binary benchmark with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub family: Family,
    pub split: Split,
    pub neg_strategy: NegStrategy,
    pub seed: u64,
    pub threshold: usize,
    pub pairs: Vec<LabeledPair>,
    /// Extra `#key=value` header lines (generator version, config hash, ...).
    pub metadata: BTreeMap<String, String>,
}

/// A violated dataset invariant.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetViolation {
    #[error("unbalanced: {positives} positives vs {negatives} negatives")]
    Unbalanced { positives: usize, negatives: usize },
    #[error("duplicate pair ({0}, {1})")]
    Duplicate(String, String),
}

impl SimilarityDataset {
    pub fn dataset_name(family: Family, split: Split, strategy: NegStrategy) -> String {
        format!("{family}_{split}_{strategy}")
    }

    pub fn positives(&self) -> impl Iterator<Item = &LabeledPair> {
        self.pairs.iter().filter(|p| p.label == SIMILAR)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &LabeledPair> {
        self.pairs.iter().filter(|p| p.label == DISSIMILAR)
    }

    /// Balance and uniqueness of canonical pairs (which also rules out a pair
    /// carrying both labels).
    pub fn check(&self) -> Result<(), DatasetViolation> {
        let positives = self.positives().count();
        let negatives = self.negatives().count();
        if positives != negatives {
            return Err(DatasetViolation::Unbalanced {
                positives,
                negatives,
            });
        }
        let mut seen = HashSet::new();
        for p in &self.pairs {
            if !seen.insert(p.pair.canonical_key()) {
                return Err(DatasetViolation::Duplicate(
                    p.pair.term_a.clone(),
                    p.pair.term_b.clone(),
                ));
            }
        }
        Ok(())
    }
}

/// Everything a family's datasets share: positives, closure, pool, and the
/// lazily built edit-distance index.
pub struct FamilyContext {
    pub family: Family,
    pub positives: Vec<TermPair>,
    pub closure: SimilarityClosure,
    pub pool: Vec<String>,
    index: OnceLock<Option<EditDistanceIndex>>,
}

impl FamilyContext {
    pub fn new(snapshot: &OntologySnapshot, family: Family) -> Self {
        let positives = extract_family(snapshot, family);
        let closure = build_similarity_closure(&positives, snapshot);
        Self::from_parts(family, positives, closure)
    }

    pub fn from_parts(
        family: Family,
        positives: Vec<TermPair>,
        closure: SimilarityClosure,
    ) -> Self {
        let pool = term_pool(&positives);
        FamilyContext {
            family,
            positives,
            closure,
            pool,
            index: OnceLock::new(),
        }
    }

    pub fn index(&self) -> Option<&EditDistanceIndex> {
        self.index
            .get_or_init(|| EditDistanceIndex::build(self.pool.iter().cloned()).ok())
            .as_ref()
    }

    pub fn split_positives(&self, split: Split, spec: SplitSpec) -> Vec<TermPair> {
        match split {
            Split::All => self.positives.clone(),
            Split::Easy => split_easy_hard(&self.positives, spec).0,
            Split::Hard => split_easy_hard(&self.positives, spec).1,
        }
    }

    pub fn assemble(
        &self,
        split: Split,
        strategy: NegStrategy,
        seed: u64,
        spec: SplitSpec,
    ) -> Result<SimilarityDataset, GenError> {
        let positives = self.split_positives(split, spec);
        let negatives = match strategy {
            NegStrategy::Random => {
                sample_negatives_random(&positives, &self.pool, &self.closure, seed)?
            }
            NegStrategy::Levenshtein => match self.index() {
                Some(index) => sample_negatives_levenshtein(&positives, &self.closure, index)?,
                None => Vec::new(),
            },
        };
        let mut pairs: Vec<LabeledPair> = positives
            .into_par_iter()
            .map(|p| LabeledPair::new(p, SIMILAR))
            .collect();
        pairs.extend(negatives);
        let mut rng = positive_stream(seed, usize::MAX);
        pairs.shuffle(&mut rng);

        let mut metadata = BTreeMap::new();
        metadata.insert("generator".to_string(), GENERATOR.to_string());
        Ok(SimilarityDataset {
            name: SimilarityDataset::dataset_name(self.family, split, strategy),
            family: self.family,
            split,
            neg_strategy: strategy,
            seed,
            threshold: spec.threshold,
            pairs,
            metadata,
        })
    }
}

/// Extracts, splits, samples and shuffles one dataset.
pub fn assemble_dataset(
    family: Family,
    split: Split,
    strategy: NegStrategy,
    seed: u64,
    snapshot: &OntologySnapshot,
) -> Result<SimilarityDataset, GenError> {
    FamilyContext::new(snapshot, family).assemble(split, strategy, seed, SplitSpec::default())
}

/// Size and mean edit distances in the layout of a dataset statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub size: usize,
    pub avg_lev_pos: Option<f64>,
    pub avg_lev_neg_random: Option<f64>,
    pub avg_lev_neg_levenshtein: Option<f64>,
}

fn mean_distance<'a>(pairs: impl Iterator<Item = &'a LabeledPair>) -> Option<f64> {
    let (sum, n) = pairs.fold((0usize, 0usize), |(s, n), p| (s + p.distance, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Statistics over the random-strategy and Levenshtein-strategy datasets
/// built from the same positives. Passing several splits pools them, which is
/// how a family's overall row is formed from its easy and hard rows.
pub fn dataset_stats(
    random: &[&SimilarityDataset],
    levenshtein: &[&SimilarityDataset],
) -> DatasetStats {
    let reference = if random.is_empty() {
        levenshtein
    } else {
        random
    };
    DatasetStats {
        size: reference.iter().map(|d| d.pairs.len()).sum(),
        avg_lev_pos: mean_distance(reference.iter().flat_map(|d| d.positives())),
        avg_lev_neg_random: mean_distance(random.iter().flat_map(|d| d.negatives())),
        avg_lev_neg_levenshtein: mean_distance(levenshtein.iter().flat_map(|d| d.negatives())),
    }
}

pub fn write_tsv<W: Write>(dataset: &SimilarityDataset, mut w: W) -> io::Result<()> {
    writeln!(w, "#name={}", dataset.name)?;
    writeln!(w, "#family={}", dataset.family)?;
    writeln!(w, "#split={}", dataset.split)?;
    writeln!(w, "#neg_strategy={}", dataset.neg_strategy)?;
    writeln!(w, "#seed={}", dataset.seed)?;
    writeln!(w, "#threshold={}", dataset.threshold)?;
    for (k, v) in &dataset.metadata {
        writeln!(w, "#{k}={v}")?;
    }
    writeln!(w, "term_a\tterm_b\tlabel")?;
    for p in &dataset.pairs {
        writeln!(w, "{}\t{}\t{}", p.pair.term_a, p.pair.term_b, p.label)?;
    }
    Ok(())
}

pub fn export_tsv(dataset: &SimilarityDataset, path: &Path) -> Result<(), GenError> {
    let mut buf = Vec::new();
    write_tsv(dataset, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn import_tsv(path: &Path) -> Result<SimilarityDataset, GenError> {
    read_tsv(fs::File::open(path)?)
}

pub fn read_tsv<R: Read>(reader: R) -> Result<SimilarityDataset, GenError> {
    let parse_err = |line: usize, message: String| GenError::Parse { line, message };
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let mut pairs = Vec::new();
    let mut seen_header = false;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if !seen_header {
            if let Some(kv) = line.strip_prefix('#') {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    parse_err(line_no, format!("metadata line without `=`: {line}"))
                })?;
                meta.insert(k.to_string(), v.to_string());
                continue;
            }
            if line != "term_a\tterm_b\tlabel" {
                return Err(parse_err(
                    line_no,
                    format!("expected header, found `{line}`"),
                ));
            }
            seen_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, label] = fields[..] else {
            return Err(parse_err(
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        };
        let label = match label {
            "1" => SIMILAR,
            "0" => DISSIMILAR,
            other => {
                return Err(parse_err(
                    line_no,
                    format!("label must be 0 or 1, got `{other}`"),
                ))
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(parse_err(line_no, "empty term".into()));
        }
        let pair = TermPair::new(a, b)
            .ok_or_else(|| parse_err(line_no, format!("pair of equal terms `{a}`")))?;
        pairs.push(LabeledPair::new(pair, label));
    }
    if !seen_header {
        return Err(parse_err(0, "missing header line".into()));
    }
    let mut take = |key: &str| {
        meta.remove(key)
            .ok_or_else(|| parse_err(0, format!("missing metadata `{key}`")))
    };
    let bad = |key: &str, e: String| parse_err(0, format!("metadata `{key}`: {e}"));
    let family: Family = take("family")?.parse().map_err(|e| bad("family", e))?;
    let split: Split = take("split")?.parse().map_err(|e| bad("split", e))?;
    let neg_strategy: NegStrategy = take("neg_strategy")?
        .parse()
        .map_err(|e| bad("neg_strategy", e))?;
    let seed: u64 = take("seed")?
        .parse()
        .map_err(|e: std::num::ParseIntError| bad("seed", e.to_string()))?;
    let threshold: usize = take("threshold")?
        .parse()
        .map_err(|e: std::num::ParseIntError| bad("threshold", e.to_string()))?;
    let name = meta
        .remove("name")
        .unwrap_or_else(|| SimilarityDataset::dataset_name(family, split, neg_strategy));
    Ok(SimilarityDataset {
        name,
        family,
        split,
        neg_strategy,
        seed,
        threshold,
        pairs,
        metadata: meta,
    })
}
