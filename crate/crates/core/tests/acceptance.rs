//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles here are written independently of the library code.

#[path = "common/workload.rs"]
mod workload;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use termsim::categorysep::{overlap_error, overlap_from_matrices, CategoryPartition};
use termsim::cli::{run_with_jobs, Command, RunConfig};
use termsim::datasetgen::{
    extract_family, import_tsv, sample_negatives_levenshtein, term_pool, Family, NegStrategy,
    SimilarityDataset, Split, DISSIMILAR, SIMILAR,
};
use termsim::embeddings::{covered_subset, term_matrix, EmbeddingKind, TermMatrix, WordEmbedding};
use termsim::evaluation::{
    auc, bca_bootstrap_diff, bonferroni_alpha, comparisons, krippendorff_alpha, majority_vote,
    mcnemar_from_counts, optimize_threshold, BootstrapConfig, Vote,
};
use termsim::ontology::{parse_release, ReleasePaths};
use termsim::simmetrics::{kendall, pearson, spearman, BaseMetric, MetricSpec};
use termsim::strings::{levenshtein, EditDistanceIndex};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fixture.toml");
    RunConfig::load(&path).expect("fixture config")
}

fn random_string(rng: &mut ChaCha8Rng, alphabet: &[char], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Edit distance straight from the recursive definition (memoised).
fn recursive_distance(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let d = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], &b[1..], memo)
                .min(go(&a[1..], b, memo))
                .min(go(a, &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), d);
        d
    }
    go(a, b, &mut HashMap::new())
}

fn c1_levenshtein_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphabet: Vec<char> = "abcAé ".chars().collect();
    for _ in 0..1000 {
        let a = random_string(&mut rng, &alphabet, 8);
        let b = random_string(&mut rng, &alphabet, 8);
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        let (got, want) = (levenshtein(&a, &b), recursive_distance(&ca, &cb));
        ensure(got == want, || format!("{a:?} vs {b:?}: {got} != {want}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:.1?}")
    })?;
    Ok(format!("1000 pairs exact in {elapsed:.1?}"))
}

fn c2_index_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphabet: Vec<char> = "abcdeAB ".chars().collect();
    let mut queries = 0;
    while queries < 200 {
        let mut pool: Vec<String> = (0..500)
            .map(|_| random_string(&mut rng, &alphabet, 10))
            .collect();
        pool.sort();
        pool.dedup();
        let index = EditDistanceIndex::build(pool.iter().cloned()).expect("non-empty");
        for _ in 0..20 {
            let query = random_string(&mut rng, &alphabet, 10);
            let mut excluded: HashSet<String> =
                pool.iter().filter(|_| rng.gen_bool(0.2)).cloned().collect();
            excluded.insert(query.clone());
            let excluded_keys: HashSet<String> =
                excluded.iter().map(|t| t.to_lowercase()).collect();
            let want = pool
                .iter()
                .filter(|t| !excluded_keys.contains(&t.to_lowercase()))
                .map(|t| (levenshtein(&query, t), t.to_lowercase(), t.clone()))
                .min()
                .map(|(d, _, t)| (t, d));
            let got = index
                .nearest_excluding(&query, &excluded)
                .map(|(t, d)| (t.to_string(), d));
            ensure(got == want, || {
                format!("query {query:?}: {got:?} != {want:?}")
            })?;
            queries += 1;
        }
    }
    Ok(format!(
        "{queries} queries over pools of 500 match the exhaustive scan"
    ))
}

struct BuiltFixture {
    datasets: Vec<SimilarityDataset>,
    elapsed: Duration,
    cfg: RunConfig,
    _dir: tempfile::TempDir,
}

fn build_fixture() -> Result<BuiltFixture, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = fixture_config();
    cfg.out = dir.path().to_path_buf();
    let start = Instant::now();
    let outcome = run_with_jobs(Command::Build, &cfg, 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut datasets = Vec::new();
    for f in outcome
        .files
        .iter()
        .filter(|f| f.parent().is_some_and(|p| p.ends_with("datasets")))
    {
        datasets.push(import_tsv(f).map_err(|e| format!("{}: {e}", f.display()))?);
    }
    Ok(BuiltFixture {
        datasets,
        elapsed,
        cfg,
        _dir: dir,
    })
}

/// Connected components over pairing keys, built from scratch.
struct Components(HashMap<String, usize>);

impl Components {
    fn new(groups: &[Vec<String>]) -> Self {
        let mut adj: HashMap<String, Vec<String>> = HashMap::new();
        for g in groups {
            let keys: Vec<String> = g.iter().map(|t| t.to_lowercase()).collect();
            for k in &keys {
                adj.entry(k.clone())
                    .or_default()
                    .extend(keys.iter().cloned());
            }
        }
        let mut comp = HashMap::new();
        let mut next = 0;
        let mut nodes: Vec<&String> = adj.keys().collect();
        nodes.sort();
        for start in nodes {
            if comp.contains_key(start) {
                continue;
            }
            let mut stack = vec![start.clone()];
            while let Some(k) = stack.pop() {
                if comp.insert(k.clone(), next).is_none() {
                    stack.extend(adj[&k].iter().filter(|n| !comp.contains_key(*n)).cloned());
                }
            }
            next += 1;
        }
        Components(comp)
    }

    fn similar(&self, a: &str, b: &str) -> bool {
        let (ka, kb) = (a.to_lowercase(), b.to_lowercase());
        ka == kb || matches!((self.0.get(&ka), self.0.get(&kb)), (Some(x), Some(y)) if x == y)
    }
}

fn c3_pipeline_structure(built: &BuiltFixture) -> Outcome {
    let ds = &built.datasets;
    ensure(ds.len() == 20, || {
        format!("{} datasets built, expected 20", ds.len())
    })?;
    ensure(built.elapsed < Duration::from_secs(30), || {
        format!("build took {:.1?}", built.elapsed)
    })?;

    let ont = built.cfg.ontology.as_ref().ok_or("no ontology section")?;
    let paths = ReleasePaths {
        concepts: built.cfg.resolve(&ont.concepts),
        descriptions: built.cfg.resolve(&ont.descriptions),
        associations: built.cfg.resolve(&ont.associations),
    };
    let (mut snapshot, _) = parse_release(&paths, &ont.ids).map_err(|e| e.to_string())?;
    for &m in &ont.exclude_modules {
        snapshot = snapshot.exclude_module(m);
    }
    let concept_groups: Vec<Vec<String>> = snapshot
        .concepts()
        .map(|c| snapshot.concept_terms(c.id))
        .collect();

    for d in ds {
        let pos = d.pairs.iter().filter(|p| p.label == SIMILAR).count();
        let neg = d.pairs.iter().filter(|p| p.label == DISSIMILAR).count();
        ensure(pos == neg && pos > 0, || {
            format!("{}: {pos} pos vs {neg} neg", d.name)
        })?;

        let mut seen = HashSet::new();
        for p in &d.pairs {
            let (a, b) = (p.pair.term_a.to_lowercase(), p.pair.term_b.to_lowercase());
            let key = if a <= b { (a, b) } else { (b, a) };
            ensure(seen.insert(key), || {
                format!("{}: duplicate {:?}", d.name, p.pair)
            })?;
        }

        let mut groups = concept_groups.clone();
        groups.extend(
            extract_family(&snapshot, d.family)
                .into_iter()
                .map(|p| vec![p.term_a, p.term_b]),
        );
        let comps = Components::new(&groups);
        for p in d.pairs.iter().filter(|p| p.label == DISSIMILAR) {
            ensure(!comps.similar(&p.pair.term_a, &p.pair.term_b), || {
                format!("{}: negative {:?} is closure-similar", d.name, p.pair)
            })?;
        }

        for p in d.pairs.iter().filter(|p| p.label == SIMILAR) {
            let dist = recursive_distance(
                &p.pair.term_a.chars().collect::<Vec<_>>(),
                &p.pair.term_b.chars().collect::<Vec<_>>(),
            );
            let easy = dist <= 5;
            let ok = match d.split {
                Split::Easy => easy,
                Split::Hard => !easy,
                Split::All => true,
            };
            ensure(ok, || format!("{}: positive at distance {dist}", d.name))?;
        }
    }
    Ok(format!(
        "20 datasets balanced, duplicate-free, closure-clean, split-correct in {:.1?}",
        built.elapsed
    ))
}

fn mean_distance<'a>(pairs: impl Iterator<Item = &'a termsim::datasetgen::LabeledPair>) -> f64 {
    let d: Vec<f64> = pairs
        .map(|p| levenshtein(&p.pair.term_a, &p.pair.term_b) as f64)
        .collect();
    d.iter().sum::<f64>() / d.len() as f64
}

fn c4_directional(built: &BuiltFixture) -> Outcome {
    let find = |f: Family, s: Split, n: NegStrategy| {
        built
            .datasets
            .iter()
            .find(|d| d.family == f && d.split == s && d.neg_strategy == n)
            .ok_or_else(|| format!("missing {f}/{s}/{n}"))
    };
    let mut checks = 0;
    for family in Family::ALL {
        let mut lev_all = Vec::new();
        let mut rand_all = Vec::new();
        for split in [Split::Easy, Split::Hard] {
            let r = find(family, split, NegStrategy::Random)?;
            let l = find(family, split, NegStrategy::Levenshtein)?;
            let neg_r = mean_distance(r.pairs.iter().filter(|p| p.label == DISSIMILAR));
            let neg_l = mean_distance(l.pairs.iter().filter(|p| p.label == DISSIMILAR));
            ensure(neg_l < neg_r, || {
                format!("{family}/{split}: neg-lev {neg_l:.2} >= neg-random {neg_r:.2}")
            })?;
            if split == Split::Hard {
                let pos = mean_distance(l.pairs.iter().filter(|p| p.label == SIMILAR));
                ensure(neg_l < pos, || {
                    format!("{family}/hard: neg-lev {neg_l:.2} >= positives {pos:.2}")
                })?;
                checks += 1;
            }
            lev_all.extend(l.pairs.iter().filter(|p| p.label == DISSIMILAR));
            rand_all.extend(r.pairs.iter().filter(|p| p.label == DISSIMILAR));
            checks += 1;
        }
        let (l, r) = (
            mean_distance(lev_all.into_iter()),
            mean_distance(rand_all.into_iter()),
        );
        ensure(l < r, || {
            format!("{family}: neg-lev {l:.2} >= neg-random {r:.2}")
        })?;
        checks += 1;
    }
    Ok(format!("{checks} directional comparisons hold"))
}

fn c5_determinism() -> Outcome {
    let mut runs: Vec<(usize, tempfile::TempDir)> = Vec::new();
    for jobs in [1, 1, 8, 8] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut cfg = fixture_config();
        cfg.out = dir.path().to_path_buf();
        run_with_jobs(Command::Build, &cfg, jobs).map_err(|e| e.to_string())?;
        runs.push((jobs, dir));
    }
    let listing = |root: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap().flatten() {
                let p = e.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let rel = p.strip_prefix(root).unwrap().to_path_buf();
                    files.push((rel, fs::read(&p).unwrap()));
                }
            }
        }
        files.sort();
        files
    };
    let reference = listing(runs[0].1.path());
    ensure(reference.len() == 21, || {
        format!("{} files written", reference.len())
    })?;
    for (jobs, dir) in &runs[1..] {
        ensure(listing(dir.path()) == reference, || {
            format!("output at --jobs {jobs} differs from --jobs 1")
        })?;
    }
    Ok(format!(
        "{} files byte-identical across two runs each at --jobs 1 and 8",
        reference.len()
    ))
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|a| {
            let less = x.iter().filter(|b| *b < a).count() as f64;
            let equal = x.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = (x[i] - x[j]).signum() as i64 * i64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() as i64 * i64::from(y[i] != y[j]);
            match (dx, dy) {
                (0, 0) => {
                    tie_x += 1;
                    tie_y += 1;
                }
                (0, _) => tie_x += 1,
                (_, 0) => tie_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (concordant - discordant) as f64 / (((n0 - tie_x) * (n0 - tie_y)) as f64).sqrt()
}

fn oracle_cos(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nx * ny)
}

fn c6_metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 500 {
        let dim = rng.gen_range(2..=50);
        // Coarse values so ties occur.
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim)
                .map(|_| {
                    (rng.gen_range(-1.0..1.0f64) * 4.0).round() / 4.0
                        + rng.gen_range(0..2) as f64 * rng.gen::<f64>()
                })
                .collect()
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let oracles = [
            (pearson(&x, &y), oracle_pearson(&x, &y)),
            (
                spearman(&x, &y),
                oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y)),
            ),
            (kendall(&x, &y), oracle_tau_b(&x, &y)),
        ];
        if oracles.iter().any(|(_, want)| !want.is_finite()) {
            continue;
        }
        for (name, (got, want)) in ["pearson", "spearman", "kendall"].iter().zip(oracles) {
            let got = got.map_err(|e| format!("{name} on {x:?} {y:?}: {e}"))?;
            ensure((got - want).abs() <= 1e-12, || {
                format!("{name}: {got} vs oracle {want} on {x:?} {y:?}")
            })?;
            worst = worst.max((got - want).abs());
        }
        pairs += 1;
    }

    let mut emb = WordEmbedding::new("hand", EmbeddingKind::Word, 3);
    let vectors: [(&str, [f64; 3]); 6] = [
        ("acute", [1.0, 0.0, 0.0]),
        ("renal", [1.0, 1.0, 0.0]),
        ("failure", [0.0, 2.0, 1.0]),
        ("chronic", [0.0, 0.0, 3.0]),
        ("kidney", [2.0, 2.0, 1.0]),
        ("disease", [-1.0, 0.5, 0.5]),
    ];
    for (w, v) in &vectors {
        emb.insert(w, v);
    }
    let a = term_matrix(&emb, "acute renal failure").ok_or("term a not covered")?;
    let b = term_matrix(&emb, "chronic kidney disease").ok_or("term b not covered")?;
    let mut hand = 0.0;
    for (_, u) in &vectors[..3] {
        for (_, v) in &vectors[3..] {
            hand += oracle_cos(u, v);
        }
    }
    hand /= 9.0;
    let got = MetricSpec::Pair(BaseMetric::Cos)
        .score(&a, &b)
        .map_err(|e| e.to_string())?;
    ensure((got - hand).abs() <= 1e-12, || {
        format!("pair_cos {got} vs hand {hand}")
    })?;

    for i in 0..1000 {
        let dim = rng.gen_range(2..=12);
        let matrix = |rng: &mut ChaCha8Rng| {
            let rows: Vec<Vec<f64>> = (0..rng.gen_range(1..=5))
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            TermMatrix::from_rows("t", &rows)
        };
        let (a, b) = (matrix(&mut rng), matrix(&mut rng));
        for spec in [MetricSpec::FuzzyJaccard, MetricSpec::MaxJaccard] {
            let ab = spec.score(&a, &b);
            let ba = spec.score(&b, &a);
            match (ab, ba) {
                (Ok(x), Ok(y)) => {
                    ensure((0.0..=1.0).contains(&x), || {
                        format!("{spec} = {x} on input {i}")
                    })?;
                    ensure(x == y, || {
                        format!("{spec} asymmetric on input {i}: {x} vs {y}")
                    })?;
                }
                (Err(_), Err(_)) => {}
                (x, y) => return Err(format!("{spec} defined one way only: {x:?} / {y:?}")),
            }
        }
    }
    Ok(format!(
        "500 correlation pairs within {worst:.1e}; pair_cos matches hand sum; fJ/mJ bounded and symmetric on 1000 inputs"
    ))
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<u8>) {
    loop {
        let scores: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.gen_range(0..8u8)) / 4.0)
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        if labels.contains(&0) && labels.contains(&1) {
            return (scores, labels);
        }
    }
}

fn c7_auc_threshold() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(2..=100);
        let (scores, labels) = random_scores(&mut rng, n);
        let (mut twice_wins, mut p, mut q) = (0u64, 0u64, 0u64);
        for i in 0..n {
            if labels[i] == 1 {
                p += 1;
            } else {
                q += 1;
            }
            for j in 0..n {
                if labels[i] == 1 && labels[j] == 0 {
                    twice_wins += if scores[i] > scores[j] {
                        2
                    } else {
                        u64::from(scores[i] == scores[j])
                    };
                }
            }
        }
        let want = twice_wins as f64 / (2 * p * q) as f64;
        let got = auc(&scores, &labels).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("auc {got} vs {want} on n={n}"))?;
    }
    for _ in 0..100 {
        let n = rng.gen_range(2..=50);
        let (scores, labels) = random_scores(&mut rng, n);
        let mut cuts: Vec<f64> = scores.clone();
        cuts.push(f64::INFINITY);
        let accuracy = |t: f64| {
            scores
                .iter()
                .zip(&labels)
                .filter(|(s, l)| u8::from(**s >= t) == **l)
                .count()
        };
        let best = cuts.iter().map(|&t| accuracy(t)).max().unwrap();
        let got = optimize_threshold(&scores, &labels).map_err(|e| e.to_string())?;
        let achieved = accuracy(got.threshold);
        ensure(achieved == best, || {
            format!(
                "threshold {} reaches {achieved}/{n}, exhaustive best {best}/{n}",
                got.threshold
            )
        })?;
        ensure(got.accuracy == best as f64 / n as f64, || {
            format!("reported accuracy {} vs {best}/{n}", got.accuracy)
        })?;
    }
    Ok("AUC exact on 100 tied instances; threshold optimal on 100 instances with n <= 50".into())
}

fn c8_mcnemar() -> Outcome {
    let exact = mcnemar_from_counts(10, 2);
    let binom =
        |n: u64, k: u64| -> f64 { (1..=k).map(|i| (n - k + i) as f64 / i as f64).product() };
    let oracle = 2.0 * (10..=12).map(|k| binom(12, k)).sum::<f64>() / 4096.0;
    ensure((exact.p_value - 0.0386).abs() <= 1e-4, || {
        format!("exact p {}", exact.p_value)
    })?;
    ensure((exact.p_value - oracle).abs() <= 1e-12, || {
        format!("exact p {} vs binomial sum {oracle}", exact.p_value)
    })?;

    let asym = mcnemar_from_counts(40, 10);
    let stat = asym
        .statistic
        .ok_or("no chi-squared statistic for b=40, c=10")?;
    ensure((stat - 16.82).abs() <= 0.01, || format!("chi2 {stat}"))?;
    let survival = erfc((stat / 2.0).sqrt());
    ensure((asym.p_value - survival).abs() <= 1e-6, || {
        format!("p {} vs chi2_1 survival {survival}", asym.p_value)
    })?;
    Ok(format!(
        "exact p = {:.5}; chi2 = {stat:.2}, p = {:.3e}",
        exact.p_value, asym.p_value
    ))
}

fn c9_bca() -> Outcome {
    let n = 300;
    let mut contains_zero = 0;
    let mut significant = 0;
    for run in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + run);
        let gold: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let a: Vec<f64> = gold.iter().map(|g| g + rng.gen_range(-1.5..1.5)).collect();
        let cfg = BootstrapConfig {
            resamples: 2000,
            alpha: 0.05,
            seed: run,
        };
        let same = bca_bootstrap_diff(&a, &a, &gold, &cfg).map_err(|e| e.to_string())?;
        contains_zero += usize::from(same.contains(0.0));
        let anti: Vec<f64> = gold.iter().map(|g| -g).collect();
        let planted = bca_bootstrap_diff(&a, &anti, &gold, &cfg).map_err(|e| e.to_string())?;
        significant += usize::from(planted.significant());
    }
    ensure(contains_zero == 100, || {
        format!("{contains_zero}/100 identical runs contain 0")
    })?;
    ensure(significant >= 99, || {
        format!("{significant}/100 planted runs significant")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let gold: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
    let a: Vec<f64> = gold.iter().map(|g| g + rng.gen_range(-2.0..2.0)).collect();
    let b: Vec<f64> = gold.iter().map(|g| g + rng.gen_range(-3.0..3.0)).collect();
    let start = Instant::now();
    let cfg = BootstrapConfig {
        resamples: 10_000,
        alpha: 0.05,
        seed: 1,
    };
    bca_bootstrap_diff(&a, &b, &gold, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("B=10000 took {elapsed:.1?}")
    })?;
    Ok(format!(
        "identical 100/100 contain 0; planted {significant}/100 significant; B=10000 in {elapsed:.1?}"
    ))
}

fn c10_bonferroni() -> Outcome {
    let k = comparisons(23);
    let alpha = bonferroni_alpha(0.05, 23);
    ensure(k == 253, || format!("{k} comparisons"))?;
    ensure(alpha == 0.05 / 253.0, || format!("alpha {alpha}"))?;
    ensure((alpha - 1.976e-4).abs() < 5e-8, || format!("alpha {alpha}"))?;
    ensure(format!("{alpha:.4}") == "0.0002", || {
        format!("alpha {alpha} does not round to 0.0002")
    })?;
    Ok(format!("253 comparisons, per-test alpha {alpha:.4e}"))
}

fn c11_overlap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let metric = MetricSpec::Avg(BaseMetric::Cos);
    let words = |prefix: &str| -> Vec<String> { (0..10).map(|i| format!("{prefix}{i}")).collect() };
    let (dp, tp, org) = (words("dp"), words("tp"), words("org"));
    let partition = CategoryPartition::new(dp.clone(), tp.clone(), org.clone());
    for instance in 0..50 {
        let mut emb = WordEmbedding::new("random", EmbeddingKind::Word, 4);
        for w in dp.iter().chain(&tp).chain(&org) {
            let v: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_range(-3..=3i8))).collect();
            let v = if v.iter().all(|x| *x == 0.0) {
                vec![1.0, 0.0, 0.0, 0.0]
            } else {
                v
            };
            emb.insert(w, &v);
        }
        let sim = |a: &str, b: &str| {
            metric
                .score(
                    &term_matrix(&emb, a).unwrap(),
                    &term_matrix(&emb, b).unwrap(),
                )
                .unwrap()
        };
        let mut brute = 0u64;
        for i in &dp {
            for j in &tp {
                for k in &org {
                    brute += u64::from(sim(i, j) <= sim(i, k));
                }
            }
        }
        let got = overlap_error(&partition, &emb, metric).map_err(|e| e.to_string())?;
        ensure(got.raw_count == brute, || {
            format!("instance {instance}: {} vs brute {brute}", got.raw_count)
        })?;
        ensure(got.relative == brute as f64 / 1000.0, || {
            format!("relative {}", got.relative)
        })?;
    }

    let constant = vec![vec![0.5; 10]; 10];
    let o = overlap_from_matrices(&constant, &constant).relative;
    ensure(o == 1.0, || format!("constant similarity gives {o}"))?;

    let mut emb = WordEmbedding::new("clusters", EmbeddingKind::Word, 3);
    for (i, w) in dp.iter().chain(&tp).enumerate() {
        emb.insert(w, &[1.0, 0.01 * i as f64, 0.0]);
    }
    for (i, w) in org.iter().enumerate() {
        emb.insert(w, &[0.0, 0.01 * i as f64, 1.0]);
    }
    let o = overlap_error(&partition, &emb, metric)
        .map_err(|e| e.to_string())?
        .relative;
    ensure(o == 0.0, || format!("separated clusters give {o}"))?;
    Ok("50 instances equal the triple loop; constant 1.0; separated 0.0".into())
}

fn c12_krippendorff() -> Outcome {
    let perfect: Vec<Vec<Option<u8>>> = (0..10).map(|u| vec![Some(u % 3); 3]).collect();
    let a = krippendorff_alpha(&perfect).map_err(|e| e.to_string())?;
    ensure(a == 1.0, || format!("perfect agreement gives {a}"))?;

    // Four coders, twelve units, nominal codes, with missing values.
    let coders: [[Option<u8>; 12]; 4] = {
        let n = None;
        let s = Some;
        [
            [
                s(1),
                s(2),
                s(3),
                s(3),
                s(2),
                s(1),
                s(4),
                s(1),
                s(2),
                n,
                n,
                n,
            ],
            [
                s(1),
                s(2),
                s(3),
                s(3),
                s(2),
                s(2),
                s(4),
                s(1),
                s(2),
                s(5),
                n,
                s(3),
            ],
            [
                n,
                s(3),
                s(3),
                s(3),
                s(2),
                s(3),
                s(4),
                s(2),
                s(2),
                s(5),
                s(1),
                n,
            ],
            [
                s(1),
                s(2),
                s(3),
                s(3),
                s(2),
                s(4),
                s(4),
                s(1),
                s(2),
                s(5),
                s(1),
                n,
            ],
        ]
    };
    let table: Vec<Vec<Option<u8>>> = (0..12)
        .map(|u| coders.iter().map(|c| c[u]).collect())
        .collect();
    let oracle = nominal_alpha_oracle(&table);
    let got = krippendorff_alpha(&table).map_err(|e| e.to_string())?;
    ensure((oracle - 0.7434210526315791).abs() <= 1e-9, || {
        format!("oracle gives {oracle}")
    })?;
    ensure((got - oracle).abs() <= 1e-9, || {
        format!("alpha {got} vs oracle {oracle}")
    })?;

    let votes = [Vote::Same, Vote::NotSame, Vote::DontKnow];
    let mut cases = 0;
    for &x in &votes {
        for &y in &votes {
            for &z in &votes {
                let v = [x, y, z];
                let same = v.iter().filter(|v| **v == Vote::Same).count();
                let not_same = v.iter().filter(|v| **v == Vote::NotSame).count();
                let want = if same > not_same {
                    Some(1.0)
                } else if not_same > same {
                    Some(0.0)
                } else {
                    None
                };
                let got = majority_vote(&v);
                let ok = match want {
                    Some(w) => got == w,
                    None => got.is_nan(),
                };
                ensure(ok, || format!("{v:?}: {got} vs {want:?}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "perfect 1.0; textbook example {got:.10}; {cases} vote combinations"
    ))
}

/// Pairwise-disagreement form: alpha = 1 - (n - 1) * sum_u D_u / sum_{c != k} n_c n_k.
fn nominal_alpha_oracle(table: &[Vec<Option<u8>>]) -> f64 {
    let mut totals: HashMap<u8, f64> = HashMap::new();
    let mut disagreement = 0.0;
    let mut n = 0.0;
    for unit in table {
        let values: Vec<u8> = unit.iter().flatten().copied().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let mut unequal = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j && values[i] != values[j] {
                    unequal += 1.0;
                }
            }
        }
        disagreement += unequal / (m - 1) as f64;
        for v in values {
            *totals.entry(v).or_default() += 1.0;
        }
        n += m as f64;
    }
    let mut expected = 0.0;
    for (c, nc) in &totals {
        for (k, nk) in &totals {
            if c != k {
                expected += nc * nk;
            }
        }
    }
    1.0 - (n - 1.0) * disagreement / expected
}

fn c13_coverage_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let vocab: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    for case in 0..200 {
        let pairs: Vec<(String, String)> = (0..30)
            .map(|_| {
                let term = |rng: &mut ChaCha8Rng| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| vocab.choose(rng).unwrap().as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                (term(&mut rng), term(&mut rng))
            })
            .collect();
        let embeddings: Vec<WordEmbedding> = (0..4)
            .map(|e| {
                let mut emb = WordEmbedding::new(format!("e{e}"), EmbeddingKind::Word, 2);
                for w in &vocab {
                    if rng.gen_bool(0.85) {
                        emb.insert(w, &[1.0, 0.5]);
                    }
                }
                emb
            })
            .collect();
        let mut previous: Option<Vec<usize>> = None;
        for k in 1..=embeddings.len() {
            let refs: Vec<&WordEmbedding> = embeddings[..k].iter().collect();
            let subset = covered_subset(&pairs, &refs).indices;
            let want: Vec<usize> = (0..pairs.len())
                .filter(|&i| {
                    refs.iter().all(|e| {
                        [&pairs[i].0, &pairs[i].1]
                            .iter()
                            .all(|t| t.split(' ').all(|w| e.contains(w)))
                    })
                })
                .collect();
            ensure(subset == want, || {
                format!("case {case}: subset {subset:?} vs {want:?}")
            })?;
            if let Some(prev) = &previous {
                ensure(subset.iter().all(|i| prev.contains(i)), || {
                    format!("case {case}: subset grew when adding embedding {k}")
                })?;
            }
            previous = Some(subset);
        }
    }
    Ok(
        "200 random vocabularies: covered subset equals the all-embeddings rule and only shrinks"
            .into(),
    )
}

fn c14_performance() -> Outcome {
    let w = workload::generate(100_000, 14);
    let pool = term_pool(&w.positives);
    let start = Instant::now();
    let index = EditDistanceIndex::build(pool.iter().cloned()).map_err(|e| e.to_string())?;
    let negatives = sample_negatives_levenshtein(&w.positives, &w.closure, &index)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(negatives.len() == w.positives.len(), || {
        format!(
            "{} negatives for {} positives",
            negatives.len(),
            w.positives.len()
        )
    })?;
    let threads = rayon::current_num_threads();
    ensure(elapsed <= Duration::from_secs(600), || {
        format!("{elapsed:.1?} on {threads} thread(s)")
    })?;
    Ok(format!(
        "{} positives over {} pool terms in {elapsed:.1?} on {threads} thread(s)",
        w.positives.len(),
        pool.len()
    ))
}

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let wanted = |n: usize| filter.is_empty() || filter.iter().any(|f| f == &n.to_string());

    let built = if wanted(3) || wanted(4) {
        Some(build_fixture())
    } else {
        None
    };
    let with_fixture = |f: fn(&BuiltFixture) -> Outcome| -> Outcome {
        match built.as_ref().expect("fixture built") {
            Ok(b) => f(b),
            Err(e) => Err(format!("fixture build failed: {e}")),
        }
    };

    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(usize, &str, Check)> = vec![
        (
            1,
            "Levenshtein oracle equivalence",
            Box::new(c1_levenshtein_oracle),
        ),
        (2, "NN-index equivalence", Box::new(c2_index_equivalence)),
        (
            3,
            "pipeline structure on fixture",
            Box::new(|| with_fixture(c3_pipeline_structure)),
        ),
        (
            4,
            "directional distance checks",
            Box::new(|| with_fixture(c4_directional)),
        ),
        (5, "build determinism", Box::new(c5_determinism)),
        (6, "metric oracles", Box::new(c6_metric_oracles)),
        (7, "AUC and threshold oracles", Box::new(c7_auc_threshold)),
        (8, "McNemar", Box::new(c8_mcnemar)),
        (9, "BCa bootstrap sanity", Box::new(c9_bca)),
        (10, "Bonferroni arithmetic", Box::new(c10_bonferroni)),
        (11, "overlap metric", Box::new(c11_overlap)),
        (
            12,
            "Krippendorff alpha and majority vote",
            Box::new(c12_krippendorff),
        ),
        (13, "coverage protocol", Box::new(c13_coverage_monotone)),
        (
            14,
            "Levenshtein sampling at 100k",
            Box::new(c14_performance),
        ),
    ];

    let mut failed = 0;
    for (n, name, check) in &criteria {
        if !wanted(*n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!(
                "criterion {n:>2} PASS  {name}: {detail} [{:.1?}]",
                start.elapsed()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {n:>2} FAIL  {name}: {detail} [{:.1?}]",
                    start.elapsed()
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
