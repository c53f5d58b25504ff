//! Category separation: do close categories stay closer than distant ones?
//!
//! Given two semantically close categories (diagnostic and therapeutic
//! procedures, say) and a distant one (organisms), the overlap error counts
//! triples `(t_i, t_j, t_k)` where `sim(t_i, t_j) <= sim(t_i, t_k)`.

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::embeddings::{term_matrix, TermMatrix, WordEmbedding};
use crate::simmetrics::{MetricSpec, SimError};

#[derive(Debug, Error)]
pub enum CategoryError {
    #[error("category `{0}` is empty after dropping unencodable terms")]
    Empty(String),
    #[error("term `{0}` appears in more than one category")]
    NotDisjoint(String),
    #[error("similarity of `{0}` and `{1}`: {2}")]
    Score(String, String, SimError),
    #[error("{0}")]
    Io(#[from] io::Error),
}

/// Two close categories and one distant category.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryPartition {
    pub names: [String; 3],
    pub close_a: Vec<String>,
    pub close_b: Vec<String>,
    pub distant: Vec<String>,
}

impl CategoryPartition {
    pub fn new(close_a: Vec<String>, close_b: Vec<String>, distant: Vec<String>) -> Self {
        CategoryPartition {
            names: ["DP".into(), "TP".into(), "Org".into()],
            close_a,
            close_b,
            distant,
        }
    }

    pub fn check_disjoint(&self) -> Result<(), CategoryError> {
        let mut seen = HashSet::new();
        for t in self
            .close_a
            .iter()
            .chain(&self.close_b)
            .chain(&self.distant)
        {
            if !seen.insert(t.as_str()) {
                return Err(CategoryError::NotDisjoint(t.clone()));
            }
        }
        Ok(())
    }
}

/// Reads one term per line, skipping blank lines.
pub fn read_category_file(path: &Path) -> Result<Vec<String>, CategoryError> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(|l| l.trim().trim_start_matches('\u{feff}').to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub raw_count: u64,
    pub relative: f64,
    /// Encodable sizes of the close, close and distant categories.
    pub sizes: [usize; 3],
}

/// `#O` from `close[i][j] = sim(t_i, t_j)` and `distant[i][k] = sim(t_i, t_k)`,
/// sorting each distant row once and counting by binary search.
pub fn overlap_count(close: &[Vec<f64>], distant: &[Vec<f64>]) -> u64 {
    close
        .par_iter()
        .zip(distant)
        .map(|(row_close, row_distant)| {
            let mut sorted = row_distant.clone();
            sorted.sort_by(f64::total_cmp);
            row_close
                .iter()
                .map(|&s| (sorted.len() - sorted.partition_point(|&d| d < s)) as u64)
                .sum::<u64>()
        })
        .sum()
}

pub fn overlap_from_matrices(close: &[Vec<f64>], distant: &[Vec<f64>]) -> OverlapResult {
    let sizes = [
        close.len(),
        close.first().map_or(0, Vec::len),
        distant.first().map_or(0, Vec::len),
    ];
    let raw_count = overlap_count(close, distant);
    let total = (sizes[0] * sizes[1] * sizes[2]) as f64;
    OverlapResult {
        raw_count,
        relative: if total > 0.0 {
            raw_count as f64 / total
        } else {
            0.0
        },
        sizes,
    }
}

struct Encoded {
    close_a: Vec<TermMatrix>,
    close_b: Vec<TermMatrix>,
    distant: Vec<TermMatrix>,
}

fn encode(
    partition: &CategoryPartition,
    embedding: &WordEmbedding,
) -> Result<Encoded, CategoryError> {
    partition.check_disjoint()?;
    let enc = |terms: &[String], name: &str| {
        let m: Vec<TermMatrix> = terms
            .iter()
            .filter_map(|t| term_matrix(embedding, t))
            .collect();
        if m.is_empty() {
            Err(CategoryError::Empty(name.to_string()))
        } else {
            Ok(m)
        }
    };
    Ok(Encoded {
        close_a: enc(&partition.close_a, &partition.names[0])?,
        close_b: enc(&partition.close_b, &partition.names[1])?,
        distant: enc(&partition.distant, &partition.names[2])?,
    })
}

fn sim_matrix(
    rows: &[TermMatrix],
    cols: &[TermMatrix],
    metric: MetricSpec,
) -> Result<Vec<Vec<f64>>, CategoryError> {
    rows.par_iter()
        .map(|a| {
            cols.iter()
                .map(|b| {
                    metric
                        .score(a, b)
                        .map_err(|e| CategoryError::Score(a.term.clone(), b.term.clone(), e))
                })
                .collect()
        })
        .collect()
}

/// Overlap error over the terms the embedding can encode.
pub fn overlap_error(
    partition: &CategoryPartition,
    embedding: &WordEmbedding,
    metric: MetricSpec,
) -> Result<OverlapResult, CategoryError> {
    let e = encode(partition, embedding)?;
    let close = sim_matrix(&e.close_a, &e.close_b, metric)?;
    let distant = sim_matrix(&e.close_a, &e.distant, metric)?;
    Ok(overlap_from_matrices(&close, &distant))
}

/// Mean similarities between and within categories. Within-category means
/// are over unordered pairs without self-pairs and are `None` for
/// single-term categories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryMeans {
    pub close_a_close_b: f64,
    pub close_a_distant: f64,
    pub close_a_within: Option<f64>,
    pub close_b_within: Option<f64>,
    pub distant_within: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn within_mean(terms: &[TermMatrix], metric: MetricSpec) -> Result<Option<f64>, CategoryError> {
    let m = sim_matrix(terms, terms, metric)?;
    Ok(mean((0..terms.len()).flat_map(|i| {
        let row = &m[i];
        (i + 1..terms.len()).map(move |j| row[j])
    })))
}

pub fn avg_category_similarity(
    partition: &CategoryPartition,
    embedding: &WordEmbedding,
    metric: MetricSpec,
) -> Result<CategoryMeans, CategoryError> {
    let e = encode(partition, embedding)?;
    let close = sim_matrix(&e.close_a, &e.close_b, metric)?;
    let distant = sim_matrix(&e.close_a, &e.distant, metric)?;
    Ok(CategoryMeans {
        close_a_close_b: mean(close.iter().flatten().copied()).expect("non-empty"),
        close_a_distant: mean(distant.iter().flatten().copied()).expect("non-empty"),
        close_a_within: within_mean(&e.close_a, metric)?,
        close_b_within: within_mean(&e.close_b, metric)?,
        distant_within: within_mean(&e.distant, metric)?,
    })
}

/// Writes one report row per (embedding, metric) result.
pub fn write_category_report<W: Write>(
    mut w: W,
    names: &[String; 3],
    rows: &[(String, MetricSpec, OverlapResult, CategoryMeans)],
) -> io::Result<()> {
    let [a, b, d] = names;
    writeln!(
        w,
        "embedding\tmetric\t|{a}|\t|{b}|\t|{d}|\t#O\tO\t{a}-{b}\t{a}-{d}\t{a}-{a}\t{b}-{b}\t{d}-{d}"
    )?;
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    for (emb, metric, o, m) in rows {
        writeln!(
            w,
            "{emb}\t{metric}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            o.sizes[0],
            o.sizes[1],
            o.sizes[2],
            o.raw_count,
            o.relative,
            m.close_a_close_b,
            m.close_a_distant,
            opt(m.close_a_within),
            opt(m.close_b_within),
            opt(m.distant_within),
        )?;
    }
    Ok(())
}
