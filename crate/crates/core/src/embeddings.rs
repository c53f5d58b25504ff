//! Word- and term-vector files, tokenization, and coverage diagnostics.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strings::pairing_key;

/// Version tag of [`tokenize`], recorded in reports.
pub const TOKENIZER: &str = "lower-alnum-v1";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected {expected} components, found {found}")]
    InconsistentDim {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-finite vector component")]
    NonFinite { line: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no vectors found")]
    Empty,
}

/// Whether vectors are looked up per token or per whole term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Word,
    Term,
}

/// Token (or term) to vector mapping with a fixed dimension.
#[derive(Debug, Clone)]
pub struct WordEmbedding {
    pub name: String,
    pub kind: EmbeddingKind,
    dim: usize,
    index: HashMap<String, usize>,
    keys: Vec<String>,
    data: Vec<f64>,
}

impl WordEmbedding {
    pub fn new(name: impl Into<String>, kind: EmbeddingKind, dim: usize) -> Self {
        WordEmbedding {
            name: name.into(),
            kind,
            dim,
            index: HashMap::new(),
            keys: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Inserts a vector; returns `false` (and keeps the old one) when the key
    /// is already present.
    ///
    /// # Panics
    /// If `vector.len()` differs from the embedding dimension.
    pub fn insert(&mut self, key: &str, vector: &[f64]) -> bool {
        assert_eq!(vector.len(), self.dim, "vector dimension mismatch");
        let key = self.lookup_key(key);
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        self.data.extend_from_slice(vector);
        true
    }

    fn lookup_key(&self, raw: &str) -> String {
        match self.kind {
            EmbeddingKind::Word => raw.to_lowercase(),
            EmbeddingKind::Term => {
                pairing_key(&raw.split_whitespace().collect::<Vec<_>>().join(" "))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(&self.lookup_key(key))
    }

    pub fn vector(&self, key: &str) -> Option<&[f64]> {
        self.index
            .get(&self.lookup_key(key))
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }
}

fn parse_components(line_no: usize, fields: &[&str]) -> Result<Vec<f64>, EmbeddingError> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.parse().map_err(|_| EmbeddingError::Parse {
                line: line_no,
                message: format!("invalid number `{f}`"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(EmbeddingError::NonFinite { line: line_no })
            }
        })
        .collect()
}

/// Reads a word2vec/GloVe-style text file: an optional `count dim` header,
/// then one `token v1 ... vd` line per word. Tokens are case-folded; the
/// first occurrence of a token wins.
pub fn read_word_vectors_text<R: Read>(
    reader: R,
    name: &str,
) -> Result<WordEmbedding, EmbeddingError> {
    let mut embedding: Option<WordEmbedding> = None;
    let mut declared: Option<(usize, usize)> = None;
    let mut duplicates = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 {
            if let (Ok(count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                declared = Some((count, dim));
                continue;
            }
        }
        let values = parse_components(line_no, &fields[1..])?;
        let emb = embedding.get_or_insert_with(|| {
            let dim = declared.map_or(values.len(), |(_, d)| d);
            WordEmbedding::new(name, EmbeddingKind::Word, dim)
        });
        if values.len() != emb.dim || values.is_empty() {
            return Err(EmbeddingError::InconsistentDim {
                line: line_no,
                expected: emb.dim,
                found: values.len(),
            });
        }
        if !emb.insert(fields[0], &values) {
            duplicates += 1;
        }
    }
    let emb = embedding.ok_or(EmbeddingError::Empty)?;
    if duplicates > 0 {
        warn!("{name}: {duplicates} duplicate token(s) ignored; first occurrence kept");
    }
    if let Some((count, _)) = declared {
        let rows = emb.len() + duplicates;
        if count != rows {
            warn!("{name}: header declares {count} vectors but file has {rows}");
        }
    }
    Ok(emb)
}

pub fn load_word_vectors_text(path: &Path, name: &str) -> Result<WordEmbedding, EmbeddingError> {
    read_word_vectors_text(File::open(path)?, name)
}

/// Reads `term<TAB>v1 v2 ... vd` lines of precomputed whole-term vectors.
pub fn read_term_vectors<R: Read>(reader: R, name: &str) -> Result<WordEmbedding, EmbeddingError> {
    let mut embedding: Option<WordEmbedding> = None;
    let mut duplicates = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (term, rest) = line.split_once('\t').ok_or_else(|| EmbeddingError::Parse {
            line: line_no,
            message: "expected `term<TAB>vector`".into(),
        })?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        let values = parse_components(line_no, &fields)?;
        let emb = embedding
            .get_or_insert_with(|| WordEmbedding::new(name, EmbeddingKind::Term, values.len()));
        if values.len() != emb.dim || values.is_empty() {
            return Err(EmbeddingError::InconsistentDim {
                line: line_no,
                expected: emb.dim,
                found: values.len(),
            });
        }
        if !emb.insert(term, &values) {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        warn!("{name}: {duplicates} duplicate term(s) ignored; first occurrence kept");
    }
    embedding.ok_or(EmbeddingError::Empty)
}

pub fn load_term_vectors(path: &Path, name: &str) -> Result<WordEmbedding, EmbeddingError> {
    read_term_vectors(File::open(path)?, name)
}

/// Writes an embedding in the term-vector layout (`key<TAB>v1 ... vd`).
pub fn write_term_vectors<W: Write>(embedding: &WordEmbedding, mut w: W) -> io::Result<()> {
    for key in embedding.keys() {
        let v = embedding.vector(key).expect("own key");
        let parts: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{key}\t{}", parts.join(" "))?;
    }
    Ok(())
}

/// Lowercases, turns every non-alphanumeric character into a separator, and
/// splits. `"X-linked"` becomes `["x", "linked"]`.
pub fn tokenize(term: &str) -> Vec<String> {
    term.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Stacked vectors of a term: one row per token, or a single row for
/// term-level embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct TermMatrix {
    pub term: String,
    pub tokens: Vec<String>,
    dim: usize,
    data: Vec<f64>,
}

impl TermMatrix {
    pub fn from_rows(term: &str, rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == dim), "ragged rows");
        TermMatrix {
            term: term.to_string(),
            tokens: Vec::new(),
            dim,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row_count(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// The term's matrix, or `None` when it is out of vocabulary: any missing
/// token (or an exact-term miss for term-level embeddings) makes it OOV.
pub fn term_matrix(embedding: &WordEmbedding, term: &str) -> Option<TermMatrix> {
    match embedding.kind {
        EmbeddingKind::Term => embedding.vector(term).map(|v| TermMatrix {
            term: term.to_string(),
            tokens: vec![term.to_string()],
            dim: embedding.dim,
            data: v.to_vec(),
        }),
        EmbeddingKind::Word => {
            let tokens = tokenize(term);
            if tokens.is_empty() {
                return None;
            }
            let mut data = Vec::with_capacity(tokens.len() * embedding.dim);
            for t in &tokens {
                data.extend_from_slice(embedding.vector(t)?);
            }
            Some(TermMatrix {
                term: term.to_string(),
                tokens,
                dim: embedding.dim,
                data,
            })
        }
    }
}

pub fn is_covered(embedding: &WordEmbedding, term: &str) -> bool {
    match embedding.kind {
        EmbeddingKind::Term => embedding.contains(term),
        EmbeddingKind::Word => {
            let tokens = tokenize(term);
            !tokens.is_empty() && tokens.iter().all(|t| embedding.contains(t))
        }
    }
}

/// Pairs whose two terms are in vocabulary for every embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveredSubset {
    pub indices: Vec<usize>,
    pub total: usize,
}

impl CoveredSubset {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.indices.len() as f64 / self.total as f64
        }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn covered_subset<S: AsRef<str>>(
    pairs: &[(S, S)],
    embeddings: &[&WordEmbedding],
) -> CoveredSubset {
    let indices: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| {
            embeddings
                .iter()
                .all(|e| is_covered(e, a.as_ref()) && is_covered(e, b.as_ref()))
        })
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() && !pairs.is_empty() {
        warn!(
            "no pair is covered by all {} embedding(s)",
            embeddings.len()
        );
    }
    CoveredSubset {
        indices,
        total: pairs.len(),
    }
}

/// Share (in %) of `column`'s vocabulary that `row` also contains.
pub fn vocab_overlap(row: &WordEmbedding, column: &WordEmbedding) -> f64 {
    if column.is_empty() {
        return 0.0;
    }
    let shared = column.keys().filter(|k| row.contains(k)).count();
    shared as f64 / column.len() as f64 * 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub embedding: String,
    pub dataset: String,
    pub covered: usize,
    pub total: usize,
}

impl CoverageRow {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64 * 100.0
        }
    }
}

/// Per-embedding coverage of each dataset.
pub fn coverage_report<S: AsRef<str>>(
    datasets: &[(String, Vec<(S, S)>)],
    embeddings: &[&WordEmbedding],
) -> Vec<CoverageRow> {
    let mut rows = Vec::new();
    for e in embeddings {
        for (name, pairs) in datasets {
            let subset = covered_subset(pairs, &[*e]);
            rows.push(CoverageRow {
                embedding: e.name.clone(),
                dataset: name.clone(),
                covered: subset.indices.len(),
                total: subset.total,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_loader_basics() {
        let src = "3 4\nankle 1 0 0 0\nsprain 0 1 0 0\nof 0 0 1 0\n";
        let e = read_word_vectors_text(src.as_bytes(), "t").unwrap();
        assert_eq!((e.len(), e.dim()), (3, 4));
        assert_eq!(e.vector("Ankle"), Some(&[1.0, 0.0, 0.0, 0.0][..]));

        let no_header = "a 0.5 1.5\nb 2 3\n";
        let e = read_word_vectors_text(no_header.as_bytes(), "t").unwrap();
        assert_eq!((e.len(), e.dim()), (2, 2));

        // header undercounts: warn, keep everything
        let lying = "2 3\na 1 2 3\nb 1 2 3\nc 1 2 3\n";
        assert_eq!(
            read_word_vectors_text(lying.as_bytes(), "t").unwrap().len(),
            3
        );

        let dup = "a 1 2\nA 3 4\n";
        let e = read_word_vectors_text(dup.as_bytes(), "t").unwrap();
        assert_eq!(e.vector("a"), Some(&[1.0, 2.0][..]));
    }

    #[test]
    fn text_loader_errors() {
        let ragged = "a 1 2 3\nb 1 2\n";
        assert!(matches!(
            read_word_vectors_text(ragged.as_bytes(), "t"),
            Err(EmbeddingError::InconsistentDim {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
        let nan = "a 1 NaN\n";
        assert!(matches!(
            read_word_vectors_text(nan.as_bytes(), "t"),
            Err(EmbeddingError::NonFinite { line: 1 })
        ));
        assert!(matches!(
            read_word_vectors_text("".as_bytes(), "t"),
            Err(EmbeddingError::Empty)
        ));
    }

    #[test]
    fn term_vectors_roundtrip() {
        let src = "ankle sprain\t0.1 0.2\nMalaria\t-1.5e-3 4\n";
        let e = read_term_vectors(src.as_bytes(), "ctx").unwrap();
        assert_eq!(e.vector("Ankle  sprain"), Some(&[0.1, 0.2][..]));
        assert!(e.vector("ankle").is_none());
        let mut buf = Vec::new();
        write_term_vectors(&e, &mut buf).unwrap();
        let back = read_term_vectors(buf.as_slice(), "ctx").unwrap();
        for k in e.keys() {
            let (a, b) = (e.vector(k).unwrap(), back.vector(k).unwrap());
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("Sprain of ankle"), ["sprain", "of", "ankle"]);
        assert_eq!(tokenize("X-linked"), ["x", "linked"]);
        assert!(tokenize("---").is_empty());
    }

    fn toy() -> WordEmbedding {
        let mut e = WordEmbedding::new("toy", EmbeddingKind::Word, 2);
        e.insert("sprain", &[1.0, 0.0]);
        e.insert("of", &[0.0, 1.0]);
        e.insert("ankle", &[1.0, 1.0]);
        e
    }

    #[test]
    fn term_matrix_oov_rule() {
        let e = toy();
        let m = term_matrix(&e, "Sprain of ankle").unwrap();
        assert_eq!(m.row_count(), 3);
        assert_eq!(m.row(2), &[1.0, 1.0]);
        assert!(term_matrix(&e, "Sprain of wrist").is_none());
        assert!(term_matrix(&e, "---").is_none());

        let mut t = WordEmbedding::new("ctx", EmbeddingKind::Term, 2);
        t.insert("Sprain of ankle", &[0.3, 0.4]);
        let m = term_matrix(&t, "sprain of ankle").unwrap();
        assert_eq!(m.row_count(), 1);
    }

    #[test]
    fn coverage_and_overlap() {
        let e = toy();
        let pairs = vec![
            ("sprain".to_string(), "ankle".to_string()),
            ("sprain of ankle".to_string(), "wrist".to_string()),
            ("of".to_string(), "ankle sprain".to_string()),
        ];
        let s = covered_subset(&pairs, &[&e]);
        assert_eq!(s.indices, vec![0, 2]);
        assert!((s.fraction() - 2.0 / 3.0).abs() < 1e-15);

        let mut other = WordEmbedding::new("other", EmbeddingKind::Word, 2);
        other.insert("wrist", &[1.0, 0.0]);
        assert!(covered_subset(&pairs, &[&e, &other]).is_empty());

        assert_eq!(vocab_overlap(&e, &e), 100.0);
        assert_eq!(vocab_overlap(&e, &other), 0.0);
        let mut sub = WordEmbedding::new("sub", EmbeddingKind::Word, 2);
        sub.insert("sprain", &[1.0, 0.0]);
        assert_eq!(vocab_overlap(&e, &sub), 100.0);
        assert!((vocab_overlap(&sub, &e) - 100.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn adding_vocabulary_never_lowers_coverage(extra in proptest::collection::vec("[a-d]{1,2}", 0..6)) {
            let pairs = vec![
                ("a b".to_string(), "c".to_string()),
                ("d".to_string(), "a".to_string()),
                ("ab cd".to_string(), "b".to_string()),
            ];
            let base = toy();
            let mut bigger = base.clone();
            for w in &extra {
                bigger.insert(w, &[0.5, 0.5]);
            }
            let before = covered_subset(&pairs, &[&base]).indices.len();
            let after = covered_subset(&pairs, &[&bigger]).indices.len();
            prop_assert!(after >= before);
        }
    }
}
