//! Correlation and classification quality, significance testing, and
//! annotation-study statistics.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::simmetrics::{average_ranks, pearson};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("undefined: {0}")]
    Undefined(&'static str),
    #[error("only one class present")]
    SingleClass,
    #[error("bootstrap resample {index} stayed degenerate after {retries} redraws")]
    Degenerate { index: usize, retries: usize },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn same_len(a: usize, b: usize) -> Result<(), EvalError> {
    if a == b {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch(a, b))
    }
}

/// Spearman's rho with average ranks for ties.
pub fn spearman_correlation(pred: &[f64], gold: &[f64]) -> Result<f64, EvalError> {
    same_len(pred.len(), gold.len())?;
    if pred.len() < 3 {
        return Err(EvalError::TooFew {
            needed: 3,
            got: pred.len(),
        });
    }
    if pred.iter().chain(gold).any(|x| !x.is_finite()) {
        return Err(EvalError::Undefined("non-finite value"));
    }
    pearson(&average_ranks(pred), &average_ranks(gold))
        .map_err(|_| EvalError::Undefined("constant input"))
}

fn check_binary(scores: &[f64], labels: &[u8]) -> Result<(usize, usize), EvalError> {
    same_len(scores.len(), labels.len())?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    Ok((pos, neg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub accuracy: f64,
}

/// Accuracy-maximizing threshold; a pair is predicted similar iff
/// `score >= threshold`. Candidates are the midpoints between consecutive
/// distinct scores plus both infinities; ties go to the smallest threshold.
pub fn optimize_threshold(scores: &[f64], labels: &[u8]) -> Result<ThresholdResult, EvalError> {
    let (pos, _) = check_binary(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    // Threshold -inf predicts everything similar.
    let n = scores.len() as f64;
    let mut correct = pos as i64;
    let mut best = ThresholdResult {
        threshold: f64::NEG_INFINITY,
        accuracy: correct as f64 / n,
    };
    let mut i = 0;
    while i < order.len() {
        let value = scores[order[i]];
        while i < order.len() && scores[order[i]] == value {
            correct += if labels[order[i]] == 1 { -1 } else { 1 };
            i += 1;
        }
        let threshold = if i < order.len() {
            value + (scores[order[i]] - value) / 2.0
        } else {
            f64::INFINITY
        };
        let accuracy = correct as f64 / n;
        if accuracy > best.accuracy {
            best = ThresholdResult {
                threshold,
                accuracy,
            };
        }
    }
    Ok(best)
}

pub fn predict(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

/// Area under the ROC curve as P(pos > neg) + P(pos = neg) / 2, from ranks.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, EvalError> {
    let (pos, neg) = check_binary(scores, labels)?;
    let ranks = average_ranks(scores);
    // Twice the rank sum keeps everything integral.
    let twice_rank_sum: u64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| (2.0 * r) as u64)
        .sum();
    let twice_u = twice_rank_sum - (pos * (pos + 1)) as u64;
    Ok(twice_u as f64 / (2 * pos * neg) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub threshold: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub predictions: Vec<u8>,
}

pub fn classify(scores: &[f64], labels: &[u8]) -> Result<ClassificationResult, EvalError> {
    let t = optimize_threshold(scores, labels)?;
    Ok(ClassificationResult {
        threshold: t.threshold,
        accuracy: t.accuracy,
        auc: auc(scores, labels)?,
        predictions: predict(scores, t.threshold),
    })
}

/// Discordant pairs below which the exact binomial test is used.
pub const MCNEMAR_EXACT_BELOW: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNemarResult {
    /// A correct, B wrong.
    pub b: usize,
    /// A wrong, B correct.
    pub c: usize,
    /// Continuity-corrected chi-squared statistic (asymptotic path only).
    pub statistic: Option<f64>,
    pub p_value: f64,
}

pub fn mcnemar_from_counts(b: usize, c: usize) -> McNemarResult {
    let n = b + c;
    if n == 0 {
        return McNemarResult {
            b,
            c,
            statistic: None,
            p_value: 1.0,
        };
    }
    if n < MCNEMAR_EXACT_BELOW {
        // upper binomial tail from max(b, c); C(n, j) built incrementally
        let k = b.max(c);
        let (mut coef, mut tail) = (1.0f64, 0.0);
        for j in 0..=n {
            if j > 0 {
                coef = coef * (n - j + 1) as f64 / j as f64;
            }
            if j >= k {
                tail += coef;
            }
        }
        let p = (2.0 * tail / 2f64.powi(n as i32)).min(1.0);
        return McNemarResult {
            b,
            c,
            statistic: None,
            p_value: p,
        };
    }
    let diff = (b as f64 - c as f64).abs() - 1.0;
    let stat = diff.max(0.0).powi(2) / n as f64;
    let chi = ChiSquared::new(1.0).expect("valid dof");
    McNemarResult {
        b,
        c,
        statistic: Some(stat),
        p_value: chi.sf(stat),
    }
}

pub fn mcnemar(pred_a: &[u8], pred_b: &[u8], labels: &[u8]) -> Result<McNemarResult, EvalError> {
    same_len(pred_a.len(), labels.len())?;
    same_len(pred_b.len(), labels.len())?;
    let (mut b, mut c) = (0, 0);
    for ((&pa, &pb), &l) in pred_a.iter().zip(pred_b).zip(labels) {
        match (pa == l, pb == l) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 10_000,
            alpha: 0.05,
            seed: 0,
        }
    }
}

/// Redraws allowed per degenerate bootstrap resample.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub z0: f64,
    pub acceleration: f64,
}

impl BootstrapInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn significant(&self) -> bool {
        !self.contains(0.0)
    }
}

/// Linear-interpolation quantile of sorted data, `q` in [0, 1].
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn percentile_interval(sorted_boot: &[f64], alpha: f64) -> (f64, f64) {
    (
        quantile(sorted_boot, alpha / 2.0),
        quantile(sorted_boot, 1.0 - alpha / 2.0),
    )
}

/// BCa interval from a sorted bootstrap sample and given z0 / acceleration.
pub fn bca_from_parts(sorted_boot: &[f64], alpha: f64, z0: f64, acceleration: f64) -> (f64, f64) {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let adjust = |q: f64| {
        let z = normal.inverse_cdf(q);
        let w = z0 + z;
        normal.cdf(z0 + w / (1.0 - acceleration * w))
    };
    (
        quantile(sorted_boot, adjust(alpha / 2.0)),
        quantile(sorted_boot, adjust(1.0 - alpha / 2.0)),
    )
}

fn bias_correction(sorted_boot: &[f64], estimate: f64) -> f64 {
    let below = sorted_boot.partition_point(|&x| x < estimate);
    let upto = sorted_boot.partition_point(|&x| x <= estimate);
    let b = sorted_boot.len() as f64;
    let frac = (below as f64 + 0.5 * (upto - below) as f64) / b;
    let clamp = 0.5 / b;
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(frac.clamp(clamp, 1.0 - clamp))
}

fn jackknife_acceleration(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut s2, mut s3) = (0.0, 0.0);
    for v in values {
        let d = mean - v;
        s2 += d * d;
        s3 += d * d * d;
    }
    if s2 == 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    }
}

fn diff_statistic(a: &[f64], b: &[f64], gold: &[f64]) -> Option<f64> {
    Some(spearman_correlation(a, gold).ok()? - spearman_correlation(b, gold).ok()?)
}

/// BCa interval for rho(a, gold) - rho(b, gold) under paired resampling.
///
/// Resample `i` draws from its own ChaCha stream, so the result does not
/// depend on the number of worker threads.
pub fn bca_bootstrap_diff(
    scores_a: &[f64],
    scores_b: &[f64],
    gold: &[f64],
    config: &BootstrapConfig,
) -> Result<BootstrapInterval, EvalError> {
    same_len(scores_a.len(), gold.len())?;
    same_len(scores_b.len(), gold.len())?;
    let n = gold.len();
    if n < 3 {
        return Err(EvalError::TooFew { needed: 3, got: n });
    }
    if config.resamples < 2 {
        return Err(EvalError::TooFew {
            needed: 2,
            got: config.resamples,
        });
    }
    let estimate =
        diff_statistic(scores_a, scores_b, gold).ok_or(EvalError::Undefined("constant input"))?;

    let mut boot = (0..config.resamples)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n]),
            |(ra, rb, rg), index| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(index as u64);
                for _ in 0..=MAX_REDRAWS {
                    for k in 0..n {
                        let j = rng.gen_range(0..n);
                        ra[k] = scores_a[j];
                        rb[k] = scores_b[j];
                        rg[k] = gold[j];
                    }
                    if let Some(theta) = diff_statistic(ra, rb, rg) {
                        return Ok(theta);
                    }
                }
                Err(EvalError::Degenerate {
                    index,
                    retries: MAX_REDRAWS,
                })
            },
        )
        .collect::<Result<Vec<f64>, EvalError>>()?;
    boot.sort_by(f64::total_cmp);

    let jack: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|skip| {
            let drop = |v: &[f64]| -> Vec<f64> {
                v.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, x)| *x)
                    .collect()
            };
            diff_statistic(&drop(scores_a), &drop(scores_b), &drop(gold))
        })
        .collect::<Option<Vec<f64>>>()
        .ok_or(EvalError::Undefined("degenerate jackknife sample"))?;

    let z0 = bias_correction(&boot, estimate);
    let acceleration = jackknife_acceleration(&jack);
    let (lower, upper) = bca_from_parts(&boot, config.alpha, z0, acceleration);
    Ok(BootstrapInterval {
        estimate,
        lower,
        upper,
        z0,
        acceleration,
    })
}

/// Bonferroni per-test level for all pairwise comparisons of `entities`.
pub fn bonferroni_alpha(alpha: f64, entities: usize) -> f64 {
    alpha / comparisons(entities) as f64
}

pub fn comparisons(entities: usize) -> usize {
    entities * entities.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Better,
    Worse,
    Indistinct,
}

impl Verdict {
    fn flip(self) -> Self {
        match self {
            Verdict::Better => Verdict::Worse,
            Verdict::Worse => Verdict::Better,
            Verdict::Indistinct => Verdict::Indistinct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignificanceMode {
    /// Spearman correlation against graded gold scores, BCa bootstrap.
    Correlation(BootstrapConfig),
    /// Thresholded classification against binary labels, McNemar.
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMatrix {
    pub entities: Vec<String>,
    /// `verdicts[i][j]`: how entity `i` compares to entity `j`.
    pub verdicts: Vec<Vec<Verdict>>,
    pub alpha: f64,
    pub per_test_alpha: f64,
}

impl SignificanceMatrix {
    pub fn better_count(&self, i: usize) -> usize {
        self.verdicts[i]
            .iter()
            .filter(|v| **v == Verdict::Better)
            .count()
    }

    pub fn worse_count(&self, i: usize) -> usize {
        self.verdicts[i]
            .iter()
            .filter(|v| **v == Verdict::Worse)
            .count()
    }
}

/// Pairwise tests between entities at `alpha / C(n, 2)`. `scores[i]` holds
/// entity `i`'s per-instance scores; `gold` holds graded scores in
/// correlation mode and 0/1 labels in classification mode.
pub fn significance_matrix(
    entities: &[String],
    scores: &[Vec<f64>],
    gold: &[f64],
    mode: SignificanceMode,
    alpha: f64,
) -> Result<SignificanceMatrix, EvalError> {
    let n = entities.len();
    same_len(n, scores.len())?;
    if n < 2 {
        return Err(EvalError::TooFew { needed: 2, got: n });
    }
    let per_test_alpha = bonferroni_alpha(alpha, n);
    let mut verdicts = vec![vec![Verdict::Indistinct; n]; n];

    let labels: Vec<u8> = gold.iter().map(|&g| u8::from(g >= 0.5)).collect();
    let predictions = match mode {
        SignificanceMode::Classification => scores
            .iter()
            .map(|s| classify(s, &labels).map(|r| r.predictions))
            .collect::<Result<Vec<_>, _>>()?,
        SignificanceMode::Correlation(_) => Vec::new(),
    };

    for i in 0..n {
        for j in i + 1..n {
            let verdict = match mode {
                SignificanceMode::Correlation(cfg) => {
                    let cfg = BootstrapConfig {
                        alpha: per_test_alpha,
                        ..cfg
                    };
                    let ci = bca_bootstrap_diff(&scores[i], &scores[j], gold, &cfg)?;
                    match (ci.significant(), ci.estimate > 0.0) {
                        (false, _) => Verdict::Indistinct,
                        (true, true) => Verdict::Better,
                        (true, false) => Verdict::Worse,
                    }
                }
                SignificanceMode::Classification => {
                    let m = mcnemar(&predictions[i], &predictions[j], &labels)?;
                    if m.p_value >= per_test_alpha || m.b == m.c {
                        Verdict::Indistinct
                    } else if m.b > m.c {
                        Verdict::Better
                    } else {
                        Verdict::Worse
                    }
                }
            };
            verdicts[i][j] = verdict;
            verdicts[j][i] = verdict.flip();
        }
    }
    Ok(SignificanceMatrix {
        entities: entities.to_vec(),
        verdicts,
        alpha,
        per_test_alpha,
    })
}

pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // corrected two-pass: the second term cancels the rounding error of `mean`
    let (mut ss, mut s) = (0.0, 0.0);
    for v in values {
        ss += (v - mean) * (v - mean);
        s += v - mean;
    }
    (ss - s * s / n) / n
}

/// Median; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// `per_dataset[d]` holds one embedding's scores on dataset `d` under each
/// metric. Variance is taken across metrics, then summarized across datasets.
pub fn metric_variance(per_dataset: &[Vec<f64>]) -> Result<VarianceSummary, EvalError> {
    if per_dataset.is_empty() {
        return Err(EvalError::TooFew { needed: 1, got: 0 });
    }
    if let Some(cell) = per_dataset.iter().find(|c| c.len() < 2) {
        return Err(EvalError::TooFew {
            needed: 2,
            got: cell.len(),
        });
    }
    let vars: Vec<f64> = per_dataset.iter().map(|c| population_variance(c)).collect();
    Ok(VarianceSummary {
        min: vars.iter().copied().fold(f64::INFINITY, f64::min),
        median: median(&vars),
        max: vars.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vote {
    Same,
    NotSame,
    DontKnow,
}

impl FromStr for Vote {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect();
        match norm.as_str() {
            "same" | "1" => Ok(Vote::Same),
            "notsame" | "0" => Ok(Vote::NotSame),
            "dontknow" | "unknown" | "" => Ok(Vote::DontKnow),
            _ => Err(format!("unknown verdict `{s}`")),
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vote::Same => "same",
            Vote::NotSame => "not-same",
            Vote::DontKnow => "dont-know",
        })
    }
}

/// 1 or 0 when one verdict holds a strict majority of the non-missing votes,
/// NaN otherwise.
pub fn majority_vote(votes: &[Vote]) -> f64 {
    let same = votes.iter().filter(|v| **v == Vote::Same).count();
    let not_same = votes.iter().filter(|v| **v == Vote::NotSame).count();
    match same.cmp(&not_same) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => f64::NAN,
    }
}

/// Nominal Krippendorff's alpha. `table[u]` holds unit `u`'s codings, one
/// slot per coder, `None` for missing.
pub fn krippendorff_alpha<T: Ord + Clone>(table: &[Vec<Option<T>>]) -> Result<f64, EvalError> {
    let mut coincidence: BTreeMap<(T, T), f64> = BTreeMap::new();
    for unit in table {
        let values: Vec<&T> = unit.iter().flatten().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry(((*a).clone(), (*b).clone())).or_default() += w;
                }
            }
        }
    }
    let n: f64 = coincidence.values().sum();
    if n < 2.0 {
        return Err(EvalError::Undefined("no pairable values"));
    }
    let mut marginals: BTreeMap<&T, f64> = BTreeMap::new();
    let mut observed = 0.0;
    for ((a, b), o) in &coincidence {
        *marginals.entry(a).or_default() += o;
        if a != b {
            observed += o;
        }
    }
    let total_sq: f64 = marginals.values().map(|m| m * m).sum();
    let expected = (n * n - total_sq) / (n - 1.0);
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - observed / expected)
}

/// Items by annotators, with absent verdicts as `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationTable {
    pub items: Vec<String>,
    pub annotators: Vec<String>,
    pub cells: Vec<Vec<Option<Vote>>>,
}

impl AnnotationTable {
    /// Majority-vote ground truth per item.
    pub fn ground_truth(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|row| majority_vote(&row.iter().flatten().copied().collect::<Vec<_>>()))
            .collect()
    }

    /// Alpha with dont-know treated as missing.
    pub fn alpha(&self) -> Result<f64, EvalError> {
        let table: Vec<Vec<Option<Vote>>> = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.filter(|v| *v != Vote::DontKnow))
                    .collect()
            })
            .collect();
        krippendorff_alpha(&table)
    }
}

/// Reads `item_id,annotator,verdict` rows (with header).
pub fn read_annotations<R: Read>(reader: R) -> Result<AnnotationTable, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut table = AnnotationTable::default();
    let mut item_idx: HashMap<String, usize> = HashMap::new();
    let mut ann_idx: HashMap<String, usize> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EvalError::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() < 3 {
            return Err(EvalError::Parse {
                line,
                message: "expected item_id,annotator,verdict".into(),
            });
        }
        let vote: Vote = rec[2]
            .parse()
            .map_err(|message| EvalError::Parse { line, message })?;
        let item = *item_idx.entry(rec[0].to_string()).or_insert_with(|| {
            table.items.push(rec[0].to_string());
            table.cells.push(vec![None; table.annotators.len()]);
            table.items.len() - 1
        });
        let ann = *ann_idx.entry(rec[1].to_string()).or_insert_with(|| {
            table.annotators.push(rec[1].to_string());
            for row in &mut table.cells {
                row.push(None);
            }
            table.annotators.len() - 1
        });
        if table.cells[item][ann].replace(vote).is_some() {
            return Err(EvalError::Parse {
                line,
                message: format!("duplicate verdict for item {}", &rec[0]),
            });
        }
    }
    Ok(table)
}

pub fn load_annotations(path: &Path) -> Result<AnnotationTable, EvalError> {
    read_annotations(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementResult {
    pub alpha: Option<f64>,
    pub items: usize,
    pub nan_fraction: f64,
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    /// Dataset label treated as the positive class.
    pub positive_label: u8,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Compares dataset labels against majority-vote ground truth; items without
/// ground truth (NaN) are left out of accuracy, recall and precision.
pub fn agreement_metrics(
    ground_truth: &[f64],
    dataset_labels: &[u8],
    positive_label: u8,
) -> Result<AgreementResult, EvalError> {
    same_len(ground_truth.len(), dataset_labels.len())?;
    let (mut tp, mut fp, mut fn_, mut correct, mut scored) = (0, 0, 0, 0, 0);
    for (&t, &d) in ground_truth.iter().zip(dataset_labels) {
        if t.is_nan() {
            continue;
        }
        scored += 1;
        let truth_pos = (t >= 0.5) == (positive_label == 1);
        let data_pos = d == positive_label;
        correct += usize::from(truth_pos == data_pos);
        match (truth_pos, data_pos) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let n = ground_truth.len();
    Ok(AgreementResult {
        alpha: None,
        items: n,
        nan_fraction: if n == 0 {
            0.0
        } else {
            (n - scored) as f64 / n as f64
        },
        accuracy: ratio(correct, scored),
        recall: ratio(tp, tp + fn_),
        precision: ratio(tp, tp + fp),
        positive_label,
    })
}

/// Term pairs with graded gold scores on a dataset-native scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedDataset {
    pub name: String,
    pub pairs: Vec<(String, String)>,
    pub scores: Vec<f64>,
    pub bounds: (f64, f64),
}

/// Reads `term_a,term_b,score` rows (with header). Without explicit bounds
/// the observed score range is used.
pub fn read_graded_csv<R: Read>(
    reader: R,
    name: &str,
    bounds: Option<(f64, f64)>,
) -> Result<GradedDataset, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut pairs, mut scores) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EvalError::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() < 3 {
            return Err(EvalError::Parse {
                line,
                message: "expected term_a,term_b,score".into(),
            });
        }
        let score: f64 = rec[2]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| EvalError::Parse {
                line,
                message: format!("invalid score `{}`", &rec[2]),
            })?;
        if let Some((lo, hi)) = bounds {
            if score < lo || score > hi {
                return Err(EvalError::Parse {
                    line,
                    message: format!("score {score} outside [{lo}, {hi}]"),
                });
            }
        }
        pairs.push((rec[0].to_string(), rec[1].to_string()));
        scores.push(score);
    }
    let bounds = bounds.unwrap_or_else(|| {
        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    Ok(GradedDataset {
        name: name.to_string(),
        pairs,
        scores,
        bounds,
    })
}

pub fn load_graded_csv(
    path: &Path,
    name: &str,
    bounds: Option<(f64, f64)>,
) -> Result<GradedDataset, EvalError> {
    read_graded_csv(File::open(path)?, name, bounds)
}
