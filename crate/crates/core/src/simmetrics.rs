//! The ten term-similarity metrics and dataset scoring.
//!
//! Multi-word terms are compared either through their mean vector (`avg_*`),
//! by averaging all cross word-pair similarities (`pair_*`), or through one
//! of two max-pooled Jaccard constructions (`fJ`, `mJ`).

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::embeddings::{term_matrix, TermMatrix, WordEmbedding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("undefined score: {0}")]
    Undefined(&'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseMetric {
    Cos,
    PearsonR,
    SpearmanRho,
    KendallTau,
}

impl BaseMetric {
    pub const ALL: [BaseMetric; 4] = [
        Self::Cos,
        Self::PearsonR,
        Self::SpearmanRho,
        Self::KendallTau,
    ];

    fn suffix(self) -> &'static str {
        match self {
            Self::Cos => "cos",
            Self::PearsonR => "r",
            Self::SpearmanRho => "rho",
            Self::KendallTau => "tau",
        }
    }

    pub fn apply(self, u: &[f64], v: &[f64]) -> Result<f64, SimError> {
        match self {
            Self::Cos => cosine(u, v),
            Self::PearsonR => pearson(u, v),
            Self::SpearmanRho => spearman(u, v),
            Self::KendallTau => kendall(u, v),
        }
    }
}

/// One of the ten legal metric combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricSpec {
    Avg(BaseMetric),
    Pair(BaseMetric),
    FuzzyJaccard,
    MaxJaccard,
}

impl MetricSpec {
    pub const ALL: [MetricSpec; 10] = [
        Self::Avg(BaseMetric::Cos),
        Self::Avg(BaseMetric::PearsonR),
        Self::Avg(BaseMetric::SpearmanRho),
        Self::Avg(BaseMetric::KendallTau),
        Self::Pair(BaseMetric::Cos),
        Self::Pair(BaseMetric::PearsonR),
        Self::Pair(BaseMetric::SpearmanRho),
        Self::Pair(BaseMetric::KendallTau),
        Self::FuzzyJaccard,
        Self::MaxJaccard,
    ];

    pub fn name(self) -> String {
        match self {
            Self::Avg(b) => format!("avg_{}", b.suffix()),
            Self::Pair(b) => format!("pair_{}", b.suffix()),
            Self::FuzzyJaccard => "fJ".into(),
            Self::MaxJaccard => "mJ".into(),
        }
    }

    pub fn score(self, a: &TermMatrix, b: &TermMatrix) -> Result<f64, SimError> {
        match self {
            Self::Avg(base) => avg_metric(a, b, base),
            Self::Pair(base) => pair_metric(a, b, base),
            Self::FuzzyJaccard => fuzzy_jaccard(a, b),
            Self::MaxJaccard => max_jaccard(a, b),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MetricSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<(), SimError> {
    if u.len() != v.len() {
        Err(SimError::DimMismatch(u.len(), v.len()))
    } else {
        Ok(())
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    check_dims(u, v)?;
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(SimError::Undefined("zero vector"));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    check_dims(u, v)?;
    if u.len() < 2 {
        return Err(SimError::Undefined("fewer than two components"));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(SimError::Undefined("constant vector"));
    }
    Ok((suv / (suu * svv).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    check_dims(u, v)?;
    pearson(&average_ranks(u), &average_ranks(v))
}

/// Kendall's tau-b in O(n log n): sort by (u, v), then count discordant
/// pairs as merge-sort exchanges on v.
pub fn kendall(u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    check_dims(u, v)?;
    let n = u.len();
    if n < 2 {
        return Err(SimError::Undefined("fewer than two components"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| u[i].total_cmp(&u[j]).then(v[i].total_cmp(&v[j])));

    let tie_pairs = |t: u64| t * (t - 1) / 2;
    let (mut ties_u, mut ties_joint) = (0u64, 0u64);
    let (mut run_u, mut run_joint) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if u[a] == u[b] {
            run_u += 1;
            if v[a] == v[b] {
                run_joint += 1;
            } else {
                ties_joint += tie_pairs(run_joint);
                run_joint = 1;
            }
        } else {
            ties_u += tie_pairs(run_u);
            ties_joint += tie_pairs(run_joint);
            run_u = 1;
            run_joint = 1;
        }
    }
    ties_u += tie_pairs(run_u);
    ties_joint += tie_pairs(run_joint);

    let mut ys: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_v = 0u64;
    let mut run_v = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_v += 1;
        } else {
            ties_v += tie_pairs(run_v);
            run_v = 1;
        }
    }
    ties_v += tie_pairs(run_v);

    let n0 = tie_pairs(n as u64);
    let du = n0 - ties_u;
    let dv = n0 - ties_v;
    if du == 0 || dv == 0 {
        return Err(SimError::Undefined("constant vector"));
    }
    let numer = n0 as i64 - ties_u as i64 - ties_v as i64 + ties_joint as i64 - 2 * swaps as i64;
    Ok((numer as f64 / ((du as f64) * (dv as f64)).sqrt()).clamp(-1.0, 1.0))
}

/// Stable merge sort of `xs`; returns the number of strict inversions.
fn merge_count(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = xs.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j] < xs[i] {
            buf[k] = xs[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = xs[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&buf[..n]);
    swaps
}

fn mean_row(m: &TermMatrix) -> Result<Vec<f64>, SimError> {
    let rows = m.row_count();
    if rows == 0 {
        return Err(SimError::Undefined("empty term matrix"));
    }
    let mut acc = vec![0.0; m.dim()];
    for r in m.rows() {
        for (a, x) in acc.iter_mut().zip(r) {
            *a += x;
        }
    }
    for a in &mut acc {
        *a /= rows as f64;
    }
    Ok(acc)
}

pub fn avg_metric(a: &TermMatrix, b: &TermMatrix, base: BaseMetric) -> Result<f64, SimError> {
    base.apply(&mean_row(a)?, &mean_row(b)?)
}

pub fn pair_metric(a: &TermMatrix, b: &TermMatrix, base: BaseMetric) -> Result<f64, SimError> {
    if a.row_count() == 0 || b.row_count() == 0 {
        return Err(SimError::Undefined("empty term matrix"));
    }
    let mut sum = 0.0;
    for x in a.rows() {
        for y in b.rows() {
            sum += base.apply(x, y)?;
        }
    }
    Ok(sum / (a.row_count() * b.row_count()) as f64)
}

fn jaccard_ratio(num: f64, den: f64) -> Result<f64, SimError> {
    if den > 0.0 {
        Ok((num / den).clamp(0.0, 1.0))
    } else {
        Err(SimError::Undefined("zero Jaccard denominator"))
    }
}

/// Membership of universe row `u` in the fuzzy set spanned by `m`'s rows.
fn membership(m: &TermMatrix, u: &[f64]) -> f64 {
    m.rows().map(|w| dot(w, u)).fold(0.0, f64::max)
}

/// Fuzzy Jaccard over the dynamic universe of both terms' word vectors.
pub fn fuzzy_jaccard(a: &TermMatrix, b: &TermMatrix) -> Result<f64, SimError> {
    check_dims(&vec![0.0; a.dim()], &vec![0.0; b.dim()])?;
    if a.row_count() == 0 || b.row_count() == 0 {
        return Err(SimError::Undefined("empty term matrix"));
    }
    // The two halves of the universe are summed separately so that swapping
    // the arguments gives a bit-identical result.
    let half = |rows: &TermMatrix| {
        let (mut num, mut den) = (0.0, 0.0);
        for u in rows.rows() {
            let (ma, mb) = (membership(a, u), membership(b, u));
            num += ma.min(mb);
            den += ma.max(mb);
        }
        (num, den)
    };
    let (na, da) = half(a);
    let (nb, db) = half(b);
    jaccard_ratio(na + nb, da + db)
}

fn max_pool(m: &TermMatrix) -> Vec<f64> {
    let mut p = vec![0.0f64; m.dim()];
    for r in m.rows() {
        for (a, &x) in p.iter_mut().zip(r) {
            *a = a.max(x);
        }
    }
    p
}

/// Jaccard ratio of the dimension-wise max-pooled (clipped at 0) vectors.
pub fn max_jaccard(a: &TermMatrix, b: &TermMatrix) -> Result<f64, SimError> {
    check_dims(&vec![0.0; a.dim()], &vec![0.0; b.dim()])?;
    let (pa, pb) = (max_pool(a), max_pool(b));
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pa.iter().zip(&pb) {
        num += x.min(*y);
        den += x.max(*y);
    }
    jaccard_ratio(num, den)
}

/// Outcome of scoring one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairScore {
    Score(f64),
    Oov,
    Undefined,
}

impl PairScore {
    pub fn value(self) -> Option<f64> {
        match self {
            PairScore::Score(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PairScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairScore::Score(v) => write!(f, "{v}"),
            _ => f.write_str("NA"),
        }
    }
}

/// Scores every pair under every requested metric; output order follows the
/// input. Term matrices are looked up once per pair.
pub fn score_pairs<S: AsRef<str> + Sync>(
    pairs: &[(S, S)],
    embedding: &WordEmbedding,
    metrics: &[MetricSpec],
) -> Vec<Vec<PairScore>> {
    pairs
        .par_iter()
        .map(|(a, b)| {
            match (
                term_matrix(embedding, a.as_ref()),
                term_matrix(embedding, b.as_ref()),
            ) {
                (Some(ma), Some(mb)) => metrics
                    .iter()
                    .map(|m| match m.score(&ma, &mb) {
                        Ok(v) if v.is_finite() => PairScore::Score(v),
                        _ => PairScore::Undefined,
                    })
                    .collect(),
                _ => vec![PairScore::Oov; metrics.len()],
            }
        })
        .collect()
}

/// Single-metric convenience over [`score_pairs`].
pub fn score_dataset<S: AsRef<str> + Sync>(
    pairs: &[(S, S)],
    embedding: &WordEmbedding,
    metric: MetricSpec,
) -> Vec<PairScore> {
    score_pairs(pairs, embedding, &[metric])
        .into_iter()
        .map(|mut row| row.remove(0))
        .collect()
}

/// One scored row of a report: the pair, its gold value and one score per metric.
pub struct ReportRow<'a> {
    pub term_a: &'a str,
    pub term_b: &'a str,
    pub gold: f64,
    pub scores: &'a [PairScore],
}

pub fn write_score_report<'a, W: Write>(
    mut w: W,
    gold_column: &str,
    metrics: &[MetricSpec],
    rows: impl IntoIterator<Item = ReportRow<'a>>,
) -> io::Result<()> {
    let names: Vec<String> = metrics.iter().map(|m| m.name()).collect();
    writeln!(w, "term_a\tterm_b\t{gold_column}\t{}", names.join("\t"))?;
    for r in rows {
        let cells: Vec<String> = r.scores.iter().map(|s| s.to_string()).collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.term_a,
            r.term_b,
            r.gold,
            cells.join("\t")
        )?;
    }
    Ok(())
}
