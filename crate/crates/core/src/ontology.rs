//! Release-file ingestion and term extraction.
//!
//! Reads the concept, description and association files of an RF2-style
//! release (Full or Snapshot flavour), keeps the latest row per component id,
//! and exposes the normalized terms the dataset builder works with.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strings::pairing_key;

/// SNOMED CT "model component" module, home of metadata concepts.
pub const MODEL_COMPONENT_MODULE: u64 = 900000000000012004;

pub type ComponentId = u64;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: empty file, expected a header row")]
    MissingHeader { file: String },
    #[error("{file}: missing required column `{column}`")]
    MissingColumn { file: String, column: &'static str },
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: duplicate row for component {id} at effective time {time}")]
    Duplicate {
        file: String,
        line: usize,
        id: ComponentId,
        time: EffectiveTime,
    },
}

/// Why a concept yields no term.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown concept {0}")]
    UnknownConcept(ComponentId),
    #[error("concept {0} has no fully specified name")]
    NoFsn(ComponentId),
    #[error("term of concept {0} is empty after normalization")]
    EmptyTerm(ComponentId),
}

/// Release date in `YYYYMMDD` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EffectiveTime(u32);

impl EffectiveTime {
    pub fn as_u32(self) -> u32 {
        self.0
    }
}

impl FromStr for EffectiveTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 8 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("effective time `{s}` is not an 8-digit date"));
        }
        let v: u32 = s.parse().map_err(|_| format!("bad effective time `{s}`"))?;
        let (month, day) = ((v / 100) % 100, v % 100);
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return Err(format!("effective time `{s}` is not a calendar date"));
        }
        Ok(EffectiveTime(v))
    }
}

impl fmt::Display for EffectiveTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DescriptionType {
    Fsn,
    Synonym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssociationKind {
    PossiblyEquivalentTo,
    ReplacedBy,
    SameAs,
}

/// Binds release identifiers to description types and association kinds.
///
/// Defaults are the international-edition SNOMED CT identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdMapping {
    pub fsn_type_id: u64,
    pub synonym_type_id: u64,
    pub possibly_equivalent_to_refset_id: u64,
    pub replaced_by_refset_id: u64,
    pub same_as_refset_id: u64,
}

impl Default for IdMapping {
    fn default() -> Self {
        IdMapping {
            fsn_type_id: 900000000000003001,
            synonym_type_id: 900000000000013009,
            possibly_equivalent_to_refset_id: 900000000000523009,
            replaced_by_refset_id: 900000000000526001,
            same_as_refset_id: 900000000000527005,
        }
    }
}

impl IdMapping {
    fn description_type(&self, type_id: u64) -> Option<DescriptionType> {
        if type_id == self.fsn_type_id {
            Some(DescriptionType::Fsn)
        } else if type_id == self.synonym_type_id {
            Some(DescriptionType::Synonym)
        } else {
            None
        }
    }

    fn association_kind(&self, refset_id: u64) -> Option<AssociationKind> {
        if refset_id == self.possibly_equivalent_to_refset_id {
            Some(AssociationKind::PossiblyEquivalentTo)
        } else if refset_id == self.replaced_by_refset_id {
            Some(AssociationKind::ReplacedBy)
        } else if refset_id == self.same_as_refset_id {
            Some(AssociationKind::SameAs)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptRow {
    pub id: ComponentId,
    pub effective_time: EffectiveTime,
    pub active: bool,
    pub module_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptionRow {
    pub id: ComponentId,
    pub effective_time: EffectiveTime,
    pub active: bool,
    pub module_id: u64,
    pub concept_id: ComponentId,
    pub kind: DescriptionType,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationRow {
    pub id: ComponentId,
    pub effective_time: EffectiveTime,
    pub active: bool,
    pub module_id: u64,
    pub kind: AssociationKind,
    pub source: ComponentId,
    pub target: ComponentId,
}

/// Row counts seen while parsing a release.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub concept_rows: usize,
    pub description_rows: usize,
    pub association_rows: usize,
    /// Description rows whose typeId is neither FSN nor synonym.
    pub ignored_description_rows: usize,
    /// Association rows from refsets other than the three tracked kinds.
    pub ignored_association_rows: usize,
}

/// Latest-state view of a release. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct OntologySnapshot {
    concepts: BTreeMap<ComponentId, ConceptRow>,
    descriptions: BTreeMap<ComponentId, Vec<DescriptionRow>>,
    associations: Vec<AssociationRow>,
    dangling: Vec<ComponentId>,
}

/// Paths of the three release files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasePaths {
    pub concepts: PathBuf,
    pub descriptions: PathBuf,
    pub associations: PathBuf,
}

pub fn parse_release(
    paths: &ReleasePaths,
    ids: &IdMapping,
) -> Result<(OntologySnapshot, ParseReport), OntologyError> {
    let open = |p: &Path| {
        File::open(p).map_err(|source| OntologyError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let label = |p: &Path| p.display().to_string();
    parse_release_from_readers(
        (label(&paths.concepts), open(&paths.concepts)?),
        (label(&paths.descriptions), open(&paths.descriptions)?),
        (label(&paths.associations), open(&paths.associations)?),
        ids,
    )
}

/// Same as [`parse_release`] over arbitrary readers, each labelled for error
/// messages.
pub fn parse_release_from_readers<C: Read, D: Read, A: Read>(
    concepts: (String, C),
    descriptions: (String, D),
    associations: (String, A),
    ids: &IdMapping,
) -> Result<(OntologySnapshot, ParseReport), OntologyError> {
    let mut report = ParseReport::default();

    let mut concept_rows: HashMap<ComponentId, ConceptRow> = HashMap::new();
    report.concept_rows = read_table(
        &concepts.0,
        concepts.1,
        &["id", "effectiveTime", "active", "moduleId"],
        |line, f| {
            let row = ConceptRow {
                id: field(&concepts.0, line, "id", f[0])?,
                effective_time: field(&concepts.0, line, "effectiveTime", f[1])?,
                active: active_flag(&concepts.0, line, f[2])?,
                module_id: field(&concepts.0, line, "moduleId", f[3])?,
            };
            keep_latest(
                &mut concept_rows,
                row,
                |r| (r.id, r.effective_time),
                &concepts.0,
                line,
            )
        },
    )?;

    let mut description_rows: HashMap<ComponentId, DescriptionRow> = HashMap::new();
    let mut ignored = 0;
    report.description_rows = read_table(
        &descriptions.0,
        descriptions.1,
        &[
            "id",
            "effectiveTime",
            "active",
            "moduleId",
            "conceptId",
            "typeId",
            "term",
        ],
        |line, f| {
            let file = &descriptions.0;
            let type_id: u64 = field(file, line, "typeId", f[5])?;
            let Some(kind) = ids.description_type(type_id) else {
                ignored += 1;
                return Ok(());
            };
            if f[6].trim().is_empty() {
                return Err(malformed(file, line, "empty term".into()));
            }
            let row = DescriptionRow {
                id: field(file, line, "id", f[0])?,
                effective_time: field(file, line, "effectiveTime", f[1])?,
                active: active_flag(file, line, f[2])?,
                module_id: field(file, line, "moduleId", f[3])?,
                concept_id: field(file, line, "conceptId", f[4])?,
                kind,
                term: f[6].to_string(),
            };
            keep_latest(
                &mut description_rows,
                row,
                |r| (r.id, r.effective_time),
                file,
                line,
            )
        },
    )?;
    report.ignored_description_rows = ignored;

    let mut association_rows: HashMap<ComponentId, AssociationRow> = HashMap::new();
    let mut ignored = 0;
    report.association_rows = read_table(
        &associations.0,
        associations.1,
        &[
            "id",
            "effectiveTime",
            "active",
            "moduleId",
            "refsetId",
            "referencedComponentId",
            "targetComponentId",
        ],
        |line, f| {
            let file = &associations.0;
            let refset_id: u64 = field(file, line, "refsetId", f[4])?;
            let Some(kind) = ids.association_kind(refset_id) else {
                ignored += 1;
                return Ok(());
            };
            // Refset member ids are UUIDs in real releases; hash them to a
            // stable numeric id when they are not plain integers.
            let id = f[0]
                .parse::<u64>()
                .unwrap_or_else(|_| stable_hash(f[0].trim()));
            let row = AssociationRow {
                id,
                effective_time: field(file, line, "effectiveTime", f[1])?,
                active: active_flag(file, line, f[2])?,
                module_id: field(file, line, "moduleId", f[3])?,
                kind,
                source: field(file, line, "referencedComponentId", f[5])?,
                target: field(file, line, "targetComponentId", f[6])?,
            };
            if row.source == row.target {
                return Err(malformed(
                    file,
                    line,
                    "association source equals target".into(),
                ));
            }
            keep_latest(
                &mut association_rows,
                row,
                |r| (r.id, r.effective_time),
                file,
                line,
            )
        },
    )?;
    report.ignored_association_rows = ignored;

    let concepts: BTreeMap<_, _> = concept_rows.into_iter().collect();
    let mut by_concept: BTreeMap<ComponentId, Vec<DescriptionRow>> = BTreeMap::new();
    let mut dangling = Vec::new();
    let mut descs: Vec<DescriptionRow> = description_rows.into_values().collect();
    descs.sort_by_key(|d| d.id);
    for d in descs {
        if !concepts.contains_key(&d.concept_id) {
            dangling.push(d.id);
        }
        by_concept.entry(d.concept_id).or_default().push(d);
    }
    if !dangling.is_empty() {
        warn!(
            "{} description(s) reference unknown concepts",
            dangling.len()
        );
    }
    let mut associations: Vec<AssociationRow> = association_rows.into_values().collect();
    associations.sort_by_key(|a| a.id);

    Ok((
        OntologySnapshot {
            concepts,
            descriptions: by_concept,
            associations,
            dangling,
        },
        report,
    ))
}

fn stable_hash(s: &str) -> u64 {
    // FNV-1a
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100000001b3)
    })
}

fn malformed(file: &str, line: usize, message: String) -> OntologyError {
    OntologyError::Malformed {
        file: file.to_string(),
        line,
        message,
    }
}

fn field<T: FromStr>(file: &str, line: usize, column: &str, raw: &str) -> Result<T, OntologyError> {
    raw.trim()
        .parse()
        .map_err(|_| malformed(file, line, format!("invalid {column} `{raw}`")))
}

fn active_flag(file: &str, line: usize, raw: &str) -> Result<bool, OntologyError> {
    match raw.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(malformed(
            file,
            line,
            format!("active must be 0 or 1, got `{other}`"),
        )),
    }
}

fn keep_latest<R>(
    rows: &mut HashMap<ComponentId, R>,
    row: R,
    key: impl Fn(&R) -> (ComponentId, EffectiveTime),
    file: &str,
    line: usize,
) -> Result<(), OntologyError> {
    let (id, time) = key(&row);
    match rows.get(&id) {
        Some(existing) if key(existing).1 == time => Err(OntologyError::Duplicate {
            file: file.to_string(),
            line,
            id,
            time,
        }),
        Some(existing) if key(existing).1 > time => Ok(()),
        _ => {
            rows.insert(id, row);
            Ok(())
        }
    }
}

/// Streams a tab-separated file with a header row, handing each data row to
/// `on_row` with its fields reordered to match `required`. Returns the number
/// of data rows.
fn read_table<R: Read>(
    file: &str,
    reader: R,
    required: &[&'static str],
    mut on_row: impl FnMut(usize, &[&str]) -> Result<(), OntologyError>,
) -> Result<usize, OntologyError> {
    let mut lines = BufReader::new(reader).lines();
    let io_err = |source| OntologyError::Io {
        path: PathBuf::from(file),
        source,
    };
    let header = match lines.next() {
        Some(h) => h.map_err(io_err)?,
        None => {
            return Err(OntologyError::MissingHeader {
                file: file.to_string(),
            })
        }
    };
    let header = header.trim_start_matches('\u{feff}').trim_end_matches('\r');
    let names: Vec<&str> = header.split('\t').collect();
    let positions: Vec<usize> = required
        .iter()
        .map(|col| {
            names
                .iter()
                .position(|n| n.trim() == *col)
                .ok_or(OntologyError::MissingColumn {
                    file: file.to_string(),
                    column: col,
                })
        })
        .collect::<Result<_, _>>()?;

    let mut count = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(io_err)?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != names.len() {
            return Err(malformed(
                file,
                line_no,
                format!("expected {} fields, found {}", names.len(), fields.len()),
            ));
        }
        let picked: Vec<&str> = positions.iter().map(|&p| fields[p]).collect();
        on_row(line_no, &picked)?;
        count += 1;
    }
    Ok(count)
}

impl OntologySnapshot {
    pub fn concepts(&self) -> impl Iterator<Item = &ConceptRow> {
        self.concepts.values()
    }

    pub fn concept(&self, id: ComponentId) -> Option<&ConceptRow> {
        self.concepts.get(&id)
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    /// Descriptions of a concept in ascending description-id order.
    pub fn descriptions_of(&self, concept: ComponentId) -> &[DescriptionRow] {
        self.descriptions.get(&concept).map_or(&[], Vec::as_slice)
    }

    pub fn description_count(&self) -> usize {
        self.descriptions.values().map(Vec::len).sum()
    }

    pub fn associations(&self) -> &[AssociationRow] {
        &self.associations
    }

    /// Ids of descriptions whose concept is not in the snapshot.
    pub fn dangling_descriptions(&self) -> &[ComponentId] {
        &self.dangling
    }

    /// Drops every concept, description and association belonging to
    /// `module_id`, plus all descriptions of the dropped concepts.
    pub fn exclude_module(&self, module_id: u64) -> OntologySnapshot {
        let concepts: BTreeMap<_, _> = self
            .concepts
            .iter()
            .filter(|(_, c)| c.module_id != module_id)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        let descriptions: BTreeMap<_, _> = self
            .descriptions
            .iter()
            .filter(|(cid, _)| {
                self.concepts
                    .get(cid)
                    .is_none_or(|c| c.module_id != module_id)
            })
            .map(|(cid, ds)| {
                let kept: Vec<_> = ds
                    .iter()
                    .filter(|d| d.module_id != module_id)
                    .cloned()
                    .collect();
                (*cid, kept)
            })
            .filter(|(_, ds)| !ds.is_empty())
            .collect();
        let kept_ids: HashSet<ComponentId> = descriptions
            .values()
            .flat_map(|ds| ds.iter().map(|d| d.id))
            .collect();
        OntologySnapshot {
            concepts,
            descriptions,
            associations: self
                .associations
                .iter()
                .filter(|a| a.module_id != module_id)
                .cloned()
                .collect(),
            dangling: self
                .dangling
                .iter()
                .copied()
                .filter(|id| kept_ids.contains(id))
                .collect(),
        }
    }

    /// The concept's current fully specified name, normalized.
    ///
    /// Active FSNs win over inactive ones; within the chosen group the latest
    /// effective time wins and remaining ties go to the lowest description id.
    /// Deactivated concepts therefore still resolve to their last FSN.
    pub fn fsn_of(&self, concept: ComponentId) -> Result<String, TermError> {
        if !self.concepts.contains_key(&concept) {
            return Err(TermError::UnknownConcept(concept));
        }
        let fsns: Vec<&DescriptionRow> = self
            .descriptions_of(concept)
            .iter()
            .filter(|d| d.kind == DescriptionType::Fsn)
            .collect();
        let any_active = fsns.iter().any(|d| d.active);
        let candidates: Vec<&DescriptionRow> = fsns
            .into_iter()
            .filter(|d| d.active == any_active)
            .collect();
        let Some(latest) = candidates.iter().map(|d| d.effective_time).max() else {
            debug!("concept {concept} has no fully specified name");
            return Err(TermError::NoFsn(concept));
        };
        let mut at_latest = candidates.iter().filter(|d| d.effective_time == latest);
        // descriptions are id-sorted, so the first hit is the lowest id
        let chosen = at_latest.next().expect("latest time comes from candidates");
        if any_active && at_latest.next().is_some() {
            warn!(
                "concept {concept} has several active FSNs at {latest}; using description {}",
                chosen.id
            );
        }
        normalize_term(&chosen.term).ok_or(TermError::EmptyTerm(concept))
    }

    /// Normalized active synonyms, deduplicated case-insensitively and with
    /// anything equal to the normalized FSN removed.
    pub fn active_synonyms(&self, concept: ComponentId) -> Vec<String> {
        let mut seen: HashSet<String> = HashSet::new();
        if let Ok(fsn) = self.fsn_of(concept) {
            seen.insert(pairing_key(&fsn));
        }
        self.descriptions_of(concept)
            .iter()
            .filter(|d| d.active && d.kind == DescriptionType::Synonym)
            .filter_map(|d| normalize_term(&d.term))
            .filter(|t| seen.insert(pairing_key(t)))
            .collect()
    }

    /// FSN followed by active synonyms; empty when the concept has no FSN.
    pub fn concept_terms(&self, concept: ComponentId) -> Vec<String> {
        match self.fsn_of(concept) {
            Ok(fsn) => std::iter::once(fsn)
                .chain(self.active_synonyms(concept))
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Normalized FSNs of active concepts whose FSN carries `tag` as its
    /// semantic tag, e.g. `"organism"`. Handy for building category lists.
    pub fn terms_with_semantic_tag(&self, tag: &str) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.concepts.values().filter(|c| c.active) {
            let raw = self
                .descriptions_of(c.id)
                .iter()
                .filter(|d| d.active && d.kind == DescriptionType::Fsn)
                .max_by(|a, b| {
                    a.effective_time
                        .cmp(&b.effective_time)
                        .then(b.id.cmp(&a.id))
                });
            if let Some(d) = raw {
                if semantic_tag(&d.term) == Some(tag) {
                    if let Some(t) = normalize_term(&d.term) {
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}

/// Contents of the trailing parenthesized group, if the term ends with one.
pub fn semantic_tag(raw: &str) -> Option<&str> {
    let s = raw.trim_end();
    let open = trailing_group_start(s)?;
    Some(&s[open + 1..s.len() - 1])
}

/// Byte offset of the `(` matching a final `)`, when that group is preceded
/// by whitespace or starts the string.
fn trailing_group_start(s: &str) -> Option<usize> {
    if !s.ends_with(')') {
        return None;
    }
    let mut depth = 0usize;
    for (i, c) in s.char_indices().rev() {
        match c {
            ')' => depth += 1,
            '(' => {
                depth -= 1;
                if depth == 0 {
                    let preceded_ok = s[..i].is_empty() || s[..i].ends_with(char::is_whitespace);
                    return preceded_ok.then_some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Strips the semantic tag and deprecation markers from a description term.
///
/// Removes a trailing ` (...)` group and a `[D]` token at either end, trims,
/// and collapses internal whitespace. Stripping repeats until nothing changes,
/// which keeps the function idempotent. Returns `None` when nothing is left.
pub fn normalize_term(raw: &str) -> Option<String> {
    let mut s = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let before = s.len();
        if s == "[D]" {
            s.clear();
        } else if let Some(rest) = s.strip_prefix("[D] ") {
            s = rest.to_string();
        }
        if let Some(rest) = s.strip_suffix(" [D]") {
            s = rest.to_string();
        }
        if let Some(open) = trailing_group_start(&s) {
            s.truncate(open);
            s.truncate(s.trim_end().len());
        }
        if s.len() == before {
            break;
        }
    }
    (!s.is_empty()).then_some(s)
}
