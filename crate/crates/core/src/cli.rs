//! Run configuration and the subcommands behind the `termsim` binary.
//!
//! Each command reads a [`RunConfig`], writes TSV reports below the output
//! directory and returns an [`Outcome`]. Every report starts with `#key=value`
//! lines carrying the tool version, the config hash and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::categorysep::{
    avg_category_similarity, overlap_error, read_category_file, write_category_report,
    CategoryPartition,
};
use crate::datasetgen::{
    dataset_stats, export_tsv, import_tsv, DatasetStats, Family, FamilyContext, NegStrategy,
    SimilarityDataset, Split, SplitSpec, GENERATOR,
};
use crate::embeddings::{
    coverage_report, covered_subset, load_term_vectors, load_word_vectors_text, vocab_overlap,
    WordEmbedding, TOKENIZER,
};
use crate::evaluation::{
    classify, load_graded_csv, significance_matrix, spearman_correlation, BootstrapConfig,
    SignificanceMode,
};
use crate::ontology::{parse_release, IdMapping, ReleasePaths, MODEL_COMPONENT_MODULE};
use crate::simmetrics::{score_pairs, MetricSpec, PairScore};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or unreadable inputs (exit code 2).
    #[error("{0}")]
    Input(String),
    /// Anything else (exit code 3).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn write_err(path: &Path, e: io::Error) -> CliError {
    CliError::Internal(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologySection {
    pub concepts: PathBuf,
    pub descriptions: PathBuf,
    pub associations: PathBuf,
    #[serde(default = "default_exclusions")]
    pub exclude_modules: Vec<u64>,
    #[serde(default)]
    pub ids: IdMapping,
}

fn default_exclusions() -> Vec<u64> {
    vec![MODEL_COMPONENT_MODULE]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorFormat {
    /// `token v1 .. vd` lines, optional `count dim` header.
    Text,
    /// `term<TAB>v1 .. vd` lines of whole-term vectors.
    TermVectors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: VectorFormat,
}

fn default_format() -> VectorFormat {
    VectorFormat::Text
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradedEntry {
    pub name: String,
    pub path: PathBuf,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySection {
    pub close_a: PathBuf,
    pub close_b: PathBuf,
    pub distant: PathBuf,
    #[serde(default = "default_category_names")]
    pub names: [String; 3],
}

fn default_category_names() -> [String; 3] {
    ["DP".into(), "TP".into(), "Org".into()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareEntities {
    /// All embeddings under one metric.
    Embeddings,
    /// All configured metrics under one embedding.
    Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_entities")]
    pub entities: CompareEntities,
    #[serde(default = "default_compare_metric")]
    pub metric: String,
    pub embedding: Option<String>,
}

fn default_entities() -> CompareEntities {
    CompareEntities::Embeddings
}

fn default_compare_metric() -> String {
    "avg_cos".into()
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            entities: default_entities(),
            metric: default_compare_metric(),
            embedding: None,
        }
    }
}

/// Everything a run depends on. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<String>,
    #[serde(default = "all_families")]
    pub families: Vec<Family>,
    #[serde(default = "default_splits")]
    pub splits: Vec<Split>,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<NegStrategy>,
    pub ontology: Option<OntologySection>,
    #[serde(default)]
    pub embeddings: Vec<EmbeddingEntry>,
    #[serde(default)]
    pub graded: Vec<GradedEntry>,
    pub categories: Option<CategorySection>,
    pub compare: Option<CompareSection>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_threshold() -> usize {
    SplitSpec::default().threshold
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_alpha() -> f64 {
    0.05
}
fn default_resamples() -> usize {
    BootstrapConfig::default().resamples
}
fn all_metrics() -> Vec<String> {
    MetricSpec::ALL.iter().map(|m| m.name()).collect()
}
fn all_families() -> Vec<Family> {
    Family::ALL.to_vec()
}
fn default_splits() -> Vec<Split> {
    vec![Split::Easy, Split::Hard]
}
fn all_strategies() -> Vec<NegStrategy> {
    NegStrategy::ALL.to_vec()
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| input(format!("config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    fn referenced_inputs(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = Vec::new();
        if let Some(o) = &self.ontology {
            v.extend([
                o.concepts.as_path(),
                o.descriptions.as_path(),
                o.associations.as_path(),
            ]);
        }
        v.extend(self.embeddings.iter().map(|e| e.path.as_path()));
        v.extend(self.graded.iter().map(|g| g.path.as_path()));
        if let Some(c) = &self.categories {
            v.extend([
                c.close_a.as_path(),
                c.close_b.as_path(),
                c.distant.as_path(),
            ]);
        }
        v
    }

    /// Checks that every referenced input exists and that names parse.
    pub fn validate(&self) -> Result<(), CliError> {
        for p in self.referenced_inputs() {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(input(format!("missing input file: {}", full.display())));
            }
        }
        self.metric_specs()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(input(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.bootstrap_resamples < 2 {
            return Err(input("bootstrap_resamples must be at least 2"));
        }
        let mut names: Vec<&str> = self.embeddings.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(input(format!("duplicate embedding name `{}`", w[0])));
        }
        Ok(())
    }

    pub fn metric_specs(&self) -> Result<Vec<MetricSpec>, CliError> {
        self.metrics
            .iter()
            .map(|m| m.parse::<MetricSpec>().map_err(input))
            .collect()
    }

    /// SHA-256 of the effective configuration as TOML. Worker count, output
    /// directory and config location do not enter it.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let text = toml::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Files written and warnings raised by a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Outcome {
    /// 0 when clean, 1 when only warnings were raised.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.warnings.is_empty())
    }

    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn header(cfg: &RunConfig) -> String {
    format!(
        "#tool={GENERATOR}\n#config_hash={}\n#seed={}\n",
        cfg.hash(),
        cfg.seed
    )
}

fn write_report(
    cfg: &RunConfig,
    name: &str,
    body: &str,
    outcome: &mut Outcome,
) -> Result<(), CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| write_err(&dir, e))?;
    let path = dir.join(name);
    fs::write(&path, format!("{}{body}", header(cfg))).map_err(|e| write_err(&path, e))?;
    info!("wrote {}", path.display());
    outcome.files.push(path);
    Ok(())
}

fn datasets_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir().join("datasets")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

/// Dataset statistics table: one row per family and split, plus a pooled
/// `all` row per family.
pub fn stats_table(datasets: &[SimilarityDataset]) -> String {
    // Random and Levenshtein datasets of each cell.
    type Cell<'a> = (Vec<&'a SimilarityDataset>, Vec<&'a SimilarityDataset>);
    let mut by_cell: BTreeMap<(Family, Split), Cell> = BTreeMap::new();
    for d in datasets {
        let cell = by_cell.entry((d.family, d.split)).or_default();
        match d.neg_strategy {
            NegStrategy::Random => cell.0.push(d),
            NegStrategy::Levenshtein => cell.1.push(d),
        }
    }
    let mut out = String::from(
        "family\tsplit\tsize\tavg_lev_pos\tavg_lev_neg_random\tavg_lev_neg_levenshtein\n",
    );
    let mut row = |family: Family, split: &str, s: DatasetStats| {
        let _ = writeln!(
            out,
            "{family}\t{split}\t{}\t{}\t{}\t{}",
            s.size,
            opt(s.avg_lev_pos),
            opt(s.avg_lev_neg_random),
            opt(s.avg_lev_neg_levenshtein)
        );
    };
    for family in Family::ALL {
        let cells: Vec<_> = by_cell.iter().filter(|((f, _), _)| *f == family).collect();
        for ((_, split), (r, l)) in &cells {
            row(family, split.name(), dataset_stats(r, l));
        }
        let pooled_splits: Vec<_> = cells
            .iter()
            .filter(|((_, s), _)| *s != Split::All)
            .collect();
        if pooled_splits.len() > 1 {
            let r: Vec<&SimilarityDataset> = pooled_splits
                .iter()
                .flat_map(|(_, (r, _))| r.iter().copied())
                .collect();
            let l: Vec<&SimilarityDataset> = pooled_splits
                .iter()
                .flat_map(|(_, (_, l))| l.iter().copied())
                .collect();
            row(family, "all", dataset_stats(&r, &l));
        }
    }
    out
}

/// Builds the configured datasets and the statistics table.
pub fn cmd_build(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let ont = cfg
        .ontology
        .as_ref()
        .ok_or_else(|| input("config has no [ontology] section"))?;
    let paths = ReleasePaths {
        concepts: cfg.resolve(&ont.concepts),
        descriptions: cfg.resolve(&ont.descriptions),
        associations: cfg.resolve(&ont.associations),
    };
    let (mut snapshot, report) = parse_release(&paths, &ont.ids).map_err(input)?;
    info!("parsed release: {report:?}");
    for &m in &ont.exclude_modules {
        snapshot = snapshot.exclude_module(m);
    }

    let mut outcome = Outcome::default();
    let dir = datasets_dir(cfg);
    fs::create_dir_all(&dir).map_err(|e| write_err(&dir, e))?;
    let spec = SplitSpec {
        threshold: cfg.threshold,
    };
    let mut built = Vec::new();
    for &family in &cfg.families {
        let ctx = FamilyContext::new(&snapshot, family);
        if ctx.positives.is_empty() {
            outcome.warn(format!("{family}: no positive pairs"));
        }
        for &split in &cfg.splits {
            for &strategy in &cfg.strategies {
                let mut d = ctx
                    .assemble(split, strategy, cfg.seed, spec)
                    .map_err(|e| CliError::Internal(format!("{family}/{split}/{strategy}: {e}")))?;
                d.metadata.insert("config_hash".into(), cfg.hash());
                let path = dir.join(format!("{}.tsv", d.name));
                export_tsv(&d, &path)
                    .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
                outcome.files.push(path);
                built.push(d);
            }
        }
    }
    write_report(cfg, "stats.tsv", &stats_table(&built), &mut outcome)?;
    Ok(outcome)
}

fn load_datasets(cfg: &RunConfig) -> Result<Vec<SimilarityDataset>, CliError> {
    let dir = datasets_dir(cfg);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| input(format!("{}: {e} (run `build` first)", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| import_tsv(p).map_err(|e| input(format!("{}: {e}", p.display()))))
        .collect()
}

/// Recomputes the statistics table from the dataset files on disk.
pub fn cmd_stats(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let datasets = load_datasets(cfg)?;
    let mut outcome = Outcome::default();
    write_report(cfg, "stats.tsv", &stats_table(&datasets), &mut outcome)?;
    Ok(outcome)
}

fn load_embeddings(cfg: &RunConfig) -> Result<Vec<WordEmbedding>, CliError> {
    if cfg.embeddings.is_empty() {
        return Err(input("config lists no embeddings"));
    }
    cfg.embeddings
        .iter()
        .map(|e| {
            let path = cfg.resolve(&e.path);
            match e.format {
                VectorFormat::Text => load_word_vectors_text(&path, &e.name),
                VectorFormat::TermVectors => load_term_vectors(&path, &e.name),
            }
            .map_err(|err| input(format!("{}: {err}", path.display())))
        })
        .collect()
}

/// A benchmark as scored by the eval and compare commands.
struct Benchmark {
    name: String,
    pairs: Vec<(String, String)>,
    gold: Vec<f64>,
    graded: bool,
}

fn load_benchmarks(cfg: &RunConfig) -> Result<Vec<Benchmark>, CliError> {
    let mut out = Vec::new();
    for g in &cfg.graded {
        let bounds = g.min.zip(g.max);
        let d = load_graded_csv(&cfg.resolve(&g.path), &g.name, bounds).map_err(input)?;
        out.push(Benchmark {
            name: d.name,
            pairs: d.pairs,
            gold: d.scores,
            graded: true,
        });
    }
    let dir = datasets_dir(cfg);
    if dir.is_dir() {
        for d in load_datasets(cfg)? {
            out.push(Benchmark {
                name: d.name,
                pairs: d
                    .pairs
                    .iter()
                    .map(|p| (p.pair.term_a.clone(), p.pair.term_b.clone()))
                    .collect(),
                gold: d.pairs.iter().map(|p| f64::from(p.label)).collect(),
                graded: false,
            });
        }
    }
    if out.is_empty() {
        return Err(input(
            "nothing to evaluate: no graded datasets and no built datasets",
        ));
    }
    Ok(out)
}

/// Restricts a benchmark to the pairs every embedding covers.
fn covered(b: &Benchmark, embeddings: &[WordEmbedding]) -> (Vec<(String, String)>, Vec<f64>) {
    let refs: Vec<&WordEmbedding> = embeddings.iter().collect();
    let subset = covered_subset(&b.pairs, &refs);
    (
        subset.indices.iter().map(|&i| b.pairs[i].clone()).collect(),
        subset.indices.iter().map(|&i| b.gold[i]).collect(),
    )
}

fn quality(graded: bool, scores: &[f64], gold: &[f64]) -> Result<[Option<f64>; 4], String> {
    if graded {
        let rho = spearman_correlation(scores, gold).map_err(|e| e.to_string())?;
        Ok([Some(rho), None, None, None])
    } else {
        let labels: Vec<u8> = gold.iter().map(|&g| g as u8).collect();
        let c = classify(scores, &labels).map_err(|e| e.to_string())?;
        Ok([None, Some(c.threshold), Some(c.accuracy), Some(c.auc)])
    }
}

/// Correlation (graded) or thresholded classification (binary) for every
/// benchmark, embedding and metric, on the subset covered by all embeddings.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let embeddings = load_embeddings(cfg)?;
    let metrics = cfg.metric_specs()?;
    let benchmarks = load_benchmarks(cfg)?;
    let mut outcome = Outcome::default();
    let mut body = format!(
        "#tokenizer={TOKENIZER}\ndataset\tkind\tembedding\tmetric\ttotal\tcovered\tscored\tspearman\tthreshold\taccuracy\tauc\tnote\n"
    );
    for b in &benchmarks {
        let kind = if b.graded { "graded" } else { "binary" };
        let (pairs, gold) = covered(b, &embeddings);
        if pairs.is_empty() {
            outcome.warn(format!(
                "{}: no pair is covered by every embedding; skipped",
                b.name
            ));
            let _ = writeln!(
                body,
                "{}\t{kind}\tNA\tNA\t{}\t0\t0\tNA\tNA\tNA\tNA\tempty-covered-subset",
                b.name,
                b.pairs.len()
            );
            continue;
        }
        for e in &embeddings {
            let scores = score_pairs(&pairs, e, &metrics);
            for (mi, m) in metrics.iter().enumerate() {
                let (s, g): (Vec<f64>, Vec<f64>) = scores
                    .iter()
                    .zip(&gold)
                    .filter_map(|(row, &g)| row[mi].value().map(|s| (s, g)))
                    .unzip();
                let (cells, note) = match quality(b.graded, &s, &g) {
                    Ok(q) => (q, String::new()),
                    Err(msg) => {
                        outcome.warn(format!("{} / {} / {m}: {msg}", b.name, e.name));
                        ([None; 4], msg.replace('\t', " "))
                    }
                };
                let _ = writeln!(
                    body,
                    "{}\t{kind}\t{}\t{m}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{note}",
                    b.name,
                    e.name,
                    b.pairs.len(),
                    pairs.len(),
                    s.len(),
                    opt(cells[0]),
                    cells[1].map_or("NA".into(), |t| t.to_string()),
                    opt(cells[2]),
                    opt(cells[3]),
                );
            }
        }
    }
    write_report(cfg, "eval.tsv", &body, &mut outcome)?;
    Ok(outcome)
}

/// Pairwise significance between embeddings (or metrics) with Bonferroni
/// correction, per benchmark.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let section = cfg.compare.clone().unwrap_or_default();
    let embeddings = load_embeddings(cfg)?;
    let benchmarks = load_benchmarks(cfg)?;
    let (entities, pick): (Vec<String>, Vec<(usize, MetricSpec)>) = match section.entities {
        CompareEntities::Embeddings => {
            let m: MetricSpec = section.metric.parse().map_err(input)?;
            (
                embeddings.iter().map(|e| e.name.clone()).collect(),
                (0..embeddings.len()).map(|i| (i, m)).collect(),
            )
        }
        CompareEntities::Metrics => {
            let name = section
                .embedding
                .clone()
                .unwrap_or_else(|| embeddings[0].name.clone());
            let idx = embeddings
                .iter()
                .position(|e| e.name == name)
                .ok_or_else(|| input(format!("unknown embedding `{name}` in [compare]")))?;
            let specs = cfg.metric_specs()?;
            (
                specs.iter().map(|m| m.name()).collect(),
                specs.iter().map(|&m| (idx, m)).collect(),
            )
        }
    };
    if entities.len() < 2 {
        return Err(input("compare needs at least two entities"));
    }

    let mut outcome = Outcome::default();
    let mut summary =
        String::from("dataset\tentity\tvalue\tbetter\tworse\tinstances\tper_test_alpha\n");
    let mut verdicts = String::from("dataset\tentity\tother\tverdict\n");
    for b in &benchmarks {
        let (pairs, gold) = covered(b, &embeddings);
        // Score every entity, then keep instances defined for all of them so
        // that the comparison runs on one shared subset.
        let per_entity: Vec<Vec<PairScore>> = pick
            .iter()
            .map(|&(ei, m)| {
                score_pairs(&pairs, &embeddings[ei], &[m])
                    .into_iter()
                    .map(|r| r[0])
                    .collect()
            })
            .collect();
        let keep: Vec<usize> = (0..pairs.len())
            .filter(|&i| per_entity.iter().all(|s| s[i].value().is_some()))
            .collect();
        if keep.len() < 3 {
            outcome.warn(format!(
                "{}: only {} shared scored instances; skipped",
                b.name,
                keep.len()
            ));
            continue;
        }
        let scores: Vec<Vec<f64>> = per_entity
            .iter()
            .map(|s| keep.iter().map(|&i| s[i].value().expect("kept")).collect())
            .collect();
        if scores.iter().any(|s| s.len() != keep.len()) {
            return Err(CliError::Internal(format!(
                "{}: entity subsets differ",
                b.name
            )));
        }
        let g: Vec<f64> = keep.iter().map(|&i| gold[i]).collect();
        let mode = if b.graded {
            SignificanceMode::Correlation(BootstrapConfig {
                resamples: cfg.bootstrap_resamples,
                alpha: cfg.alpha,
                seed: cfg.seed,
            })
        } else {
            SignificanceMode::Classification
        };
        let matrix = match significance_matrix(&entities, &scores, &g, mode, cfg.alpha) {
            Ok(m) => m,
            Err(e) => {
                outcome.warn(format!("{}: {e}", b.name));
                continue;
            }
        };
        for (i, name) in entities.iter().enumerate() {
            let value =
                quality(b.graded, &scores[i], &g)
                    .ok()
                    .and_then(|q| if b.graded { q[0] } else { q[2] });
            let _ = writeln!(
                summary,
                "{}\t{name}\t{}\t{}\t{}\t{}\t{:.4e}",
                b.name,
                opt(value),
                matrix.better_count(i),
                matrix.worse_count(i),
                keep.len(),
                matrix.per_test_alpha
            );
            for (j, other) in entities.iter().enumerate() {
                if i != j {
                    let _ = writeln!(
                        verdicts,
                        "{}\t{name}\t{other}\t{:?}",
                        b.name, matrix.verdicts[i][j]
                    );
                }
            }
        }
    }
    write_report(cfg, "compare.tsv", &summary, &mut outcome)?;
    write_report(cfg, "compare_verdicts.tsv", &verdicts, &mut outcome)?;
    Ok(outcome)
}

/// Overlap error and category mean similarities per embedding and metric.
pub fn cmd_category(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let section = cfg
        .categories
        .as_ref()
        .ok_or_else(|| input("config has no [categories] section"))?;
    let read = |p: &Path| read_category_file(&cfg.resolve(p)).map_err(input);
    let mut partition = CategoryPartition::new(
        read(&section.close_a)?,
        read(&section.close_b)?,
        read(&section.distant)?,
    );
    partition.names = section.names.clone();
    partition.check_disjoint().map_err(input)?;
    let embeddings = load_embeddings(cfg)?;
    let metrics = cfg.metric_specs()?;

    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    for e in &embeddings {
        for &m in &metrics {
            match (
                overlap_error(&partition, e, m),
                avg_category_similarity(&partition, e, m),
            ) {
                (Ok(o), Ok(means)) => rows.push((e.name.clone(), m, o, means)),
                (Err(err), _) | (_, Err(err)) => outcome.warn(format!("{} / {m}: {err}", e.name)),
            }
        }
    }
    let mut body = Vec::new();
    write_category_report(&mut body, &partition.names, &rows)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_report(
        cfg,
        "category.tsv",
        &String::from_utf8_lossy(&body),
        &mut outcome,
    )?;
    Ok(outcome)
}

/// Per-embedding dataset coverage and the vocabulary overlap matrix.
pub fn cmd_coverage(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let embeddings = load_embeddings(cfg)?;
    let benchmarks = load_benchmarks(cfg)?;
    let mut outcome = Outcome::default();

    let named: Vec<(String, Vec<(String, String)>)> = benchmarks
        .iter()
        .map(|b| (b.name.clone(), b.pairs.clone()))
        .collect();
    let refs: Vec<&WordEmbedding> = embeddings.iter().collect();
    let mut body = format!("#tokenizer={TOKENIZER}\nembedding\tdataset\tcovered\ttotal\tpercent\n");
    for r in coverage_report(&named, &refs) {
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{}\t{:.2}",
            r.embedding,
            r.dataset,
            r.covered,
            r.total,
            r.percent()
        );
    }
    for (name, pairs) in &named {
        let s = covered_subset(pairs, &refs);
        if s.is_empty() {
            outcome.warn(format!("{name}: no pair is covered by every embedding"));
        }
        let _ = writeln!(
            body,
            "ALL\t{name}\t{}\t{}\t{:.2}",
            s.indices.len(),
            s.total,
            s.fraction() * 100.0
        );
    }
    write_report(cfg, "coverage.tsv", &body, &mut outcome)?;

    let mut matrix = String::from("row\\column");
    for e in &embeddings {
        matrix.push('\t');
        matrix.push_str(&e.name);
    }
    matrix.push('\n');
    for row in &embeddings {
        matrix.push_str(&row.name);
        for col in &embeddings {
            let _ = write!(matrix, "\t{:.2}", vocab_overlap(row, col));
        }
        matrix.push('\n');
    }
    write_report(cfg, "vocab_overlap.tsv", &matrix, &mut outcome)?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Build,
    Eval,
    Compare,
    Category,
    Stats,
    Coverage,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Build => cmd_build(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Compare => cmd_compare(cfg),
        Command::Category => cmd_category(cfg),
        Command::Stats => cmd_stats(cfg),
        Command::Coverage => cmd_coverage(cfg),
    }
}

/// Runs `command` on a dedicated pool of `jobs` worker threads.
pub fn run_with_jobs(command: Command, cfg: &RunConfig, jobs: usize) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| run(command, cfg))
}
