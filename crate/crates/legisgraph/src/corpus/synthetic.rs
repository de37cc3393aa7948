//! Synthetic corpus generation.
//!
//! Raw-source conversion is pluggable behind [`Importer`]; the only importer
//! shipped with the library generates synthetic corpora. The generator
//! produces a deterministic multi-year series with controlled edit, insert,
//! delete, and rekey rates, plus the ground-truth node correspondence
//! between adjacent years (used to validate alignment heuristics).

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, DocumentTree, ElementKind, Snapshot, TreeBuilder};

/// Converts raw source material into canonical snapshots.
pub trait Importer {
    fn name(&self) -> &str;
    /// Reads importer-specific input (a file or directory) and produces
    /// snapshots in canonical form.
    fn import(&self, input: &Path) -> Result<Vec<Snapshot>, CorpusError>;
}

/// Parameters of the synthetic corpus generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub collection_id: String,
    pub start_year: i32,
    pub years: usize,
    pub documents: usize,
    pub chapters_per_doc: usize,
    pub sections_per_chapter: usize,
    pub subsections_per_section: usize,
    /// Probability that a section's text cites another section.
    pub reference_density: f64,
    /// Per-year fraction of subsections whose text is edited in place.
    pub edit_rate: f64,
    /// Per-year fraction of subsections after which a new one is inserted.
    pub insert_rate: f64,
    /// Per-year fraction of subsections deleted.
    pub delete_rate: f64,
    /// Per-year fraction of sections whose cite key changes.
    pub rekey_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            collection_id: "syn".to_string(),
            start_year: 1994,
            years: 2,
            documents: 2,
            chapters_per_doc: 3,
            sections_per_chapter: 5,
            subsections_per_section: 4,
            reference_density: 0.6,
            edit_rate: 0.05,
            insert_rate: 0.03,
            delete_rate: 0.02,
            rekey_rate: 0.10,
            seed: 42,
        }
    }
}

/// A generated corpus series plus per-adjacent-pair ground truth.
pub struct SyntheticCorpus {
    pub snapshots: Vec<Snapshot>,
    /// For years (t, t+1): element id at t → element id at t+1, at the
    /// granularity of subsequence units (subseqitems where they exist,
    /// otherwise seqitems).
    pub ground_truth: Vec<BTreeMap<String, String>>,
}

/// Importer producing a synthetic corpus from a [`SyntheticSpec`] JSON file.
pub struct SyntheticImporter;

impl Importer for SyntheticImporter {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn import(&self, input: &Path) -> Result<Vec<Snapshot>, CorpusError> {
        let raw = std::fs::read_to_string(input).map_err(|e| CorpusError::Io {
            path: input.display().to_string(),
            source: e,
        })?;
        let spec: SyntheticSpec = serde_json::from_str(&raw)
            .map_err(|e| CorpusError::Manifest(format!("{}: {e}", input.display())))?;
        Ok(generate(&spec).snapshots)
    }
}

const WORDS: &[&str] = &[
    "owner", "housing", "secretary", "plan", "action", "notice", "period", "agency", "project",
    "assistance", "payment", "benefit", "provision", "authority", "report", "program", "state",
    "applicant", "approval", "review", "standard", "requirement", "facility", "contract",
    "service", "record", "account", "federal", "annual", "eligible", "income", "limitation",
    "procedure", "determination", "regulation", "committee", "officer", "duty", "term",
    "condition", "transfer", "district", "market", "area", "unit", "rate", "cost", "fund",
    "purpose", "person", "application", "property", "interest", "mortgage", "insurance",
    "lease", "tenant", "employee", "board", "commission",
];

struct Sub {
    uid: u64,
    text: String,
}

struct Section {
    uid: u64,
    num: String,
    subs: Vec<Sub>,
    /// Sections without subsections carry their text directly.
    own_text: Option<String>,
}

struct Chapter {
    heading: String,
    sections: Vec<Section>,
}

struct Doc {
    key: String,
    heading: String,
    chapters: Vec<Chapter>,
}

/// Generates the full series described by `spec`.
pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut next_uid: u64 = 1;
    let mut docs = base_corpus(spec, &mut rng, &mut next_uid);

    let mut snapshots = Vec::with_capacity(spec.years);
    let mut uid_maps: Vec<BTreeMap<u64, String>> = Vec::with_capacity(spec.years);
    for y in 0..spec.years {
        let year = spec.start_year + y as i32;
        if y > 0 {
            evolve(&mut docs, spec, &mut rng, &mut next_uid);
        }
        let (snapshot, uid_to_id) = materialize(&docs, &spec.collection_id, year);
        snapshots.push(snapshot);
        uid_maps.push(uid_to_id);
    }

    let mut ground_truth = Vec::new();
    for pair in uid_maps.windows(2) {
        let mut map = BTreeMap::new();
        for (uid, id_t) in &pair[0] {
            if let Some(id_next) = pair[1].get(uid) {
                map.insert(id_t.clone(), id_next.clone());
            }
        }
        ground_truth.push(map);
    }

    SyntheticCorpus {
        snapshots,
        ground_truth,
    }
}

fn base_corpus(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, next_uid: &mut u64) -> Vec<Doc> {
    let mut docs = Vec::new();
    for d in 0..spec.documents {
        let key = (d + 1).to_string();
        let mut chapters = Vec::new();
        for c in 0..spec.chapters_per_doc {
            let mut sections = Vec::new();
            for s in 0..spec.sections_per_chapter {
                let uid = bump(next_uid);
                let num = format!("{}", (c + 1) * 100 + s + 1);
                // A minority of sections carry text directly, without
                // subsections.
                let bare = uid % 7 == 0;
                let mut subs = Vec::new();
                let mut own_text = None;
                if bare {
                    own_text = Some(gen_text(uid, rng));
                } else {
                    for _ in 0..spec.subsections_per_section {
                        let su = bump(next_uid);
                        subs.push(Sub {
                            uid: su,
                            text: gen_text(su, rng),
                        });
                    }
                }
                sections.push(Section {
                    uid,
                    num,
                    subs,
                    own_text,
                });
            }
            chapters.push(Chapter {
                heading: format!("Chapter {}", c + 1),
                sections,
            });
        }
        docs.push(Doc {
            key: key.clone(),
            heading: format!("Title {key}"),
            chapters,
        });
    }
    inject_references(spec, rng, &mut docs);
    docs
}

fn inject_references(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, docs: &mut [Doc]) {
    let all: Vec<(usize, String)> = docs
        .iter()
        .enumerate()
        .flat_map(|(di, d)| {
            d.chapters
                .iter()
                .flat_map(move |c| c.sections.iter().map(move |s| (di, s.num.clone())))
        })
        .collect();
    for di in 0..docs.len() {
        for c in 0..docs[di].chapters.len() {
            for s in 0..docs[di].chapters[c].sections.len() {
                if !rng.random_bool(spec.reference_density) {
                    continue;
                }
                let (tdoc, tnum) = all[rng.random_range(0..all.len())].clone();
                let citation = if tdoc == di {
                    format!(" Such actions proceed in accordance with section {tnum} of this title.")
                } else {
                    let tkey = &docs[tdoc].key.clone();
                    format!(" Such actions proceed in accordance with section {tnum} of title {tkey}.")
                };
                let sec = &mut docs[di].chapters[c].sections[s];
                match (&mut sec.own_text, sec.subs.first_mut()) {
                    (Some(t), _) => t.push_str(&citation),
                    (None, Some(first)) => first.text.push_str(&citation),
                    (None, None) => {}
                }
            }
        }
    }
}

fn evolve(docs: &mut Vec<Doc>, spec: &SyntheticSpec, rng: &mut ChaCha8Rng, next_uid: &mut u64) {
    for doc in docs.iter_mut() {
        for ch in doc.chapters.iter_mut() {
            for sec in ch.sections.iter_mut() {
                if rng.random_bool(spec.rekey_rate) {
                    sec.num = rekey(&sec.num);
                }
                if let Some(t) = &mut sec.own_text {
                    if rng.random_bool(spec.edit_rate) {
                        *t = edit_text(t, rng);
                    }
                }
                let mut i = 0;
                while i < sec.subs.len() {
                    if rng.random_bool(spec.delete_rate) {
                        sec.subs.remove(i);
                        continue;
                    }
                    if rng.random_bool(spec.edit_rate) {
                        sec.subs[i].text = edit_text(&sec.subs[i].text, rng);
                    }
                    if rng.random_bool(spec.insert_rate) {
                        let su = bump(next_uid);
                        sec.subs.insert(
                            i + 1,
                            Sub {
                                uid: su,
                                text: gen_text(su, rng),
                            },
                        );
                        i += 1;
                    }
                    i += 1;
                }
            }
        }
    }
}

/// Suffixes or advances a trailing letter so the key keeps its position in
/// natural order relative to its neighbours.
fn rekey(num: &str) -> String {
    match num.chars().last() {
        Some(c) if c.is_ascii_alphabetic() && c < 'z' => {
            let mut s = num[..num.len() - 1].to_string();
            s.push((c as u8 + 1) as char);
            s
        }
        _ => format!("{num}a"),
    }
}

fn bump(uid: &mut u64) -> u64 {
    let v = *uid;
    *uid += 1;
    v
}

/// Deterministic pseudo-legal prose. The closing sentence encodes the uid
/// through word choices, which keeps texts globally unique.
fn gen_text(uid: u64, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let sentences = 2 + (rng.random_range(0..2u8)) as usize;
    for _ in 0..sentences {
        let len = rng.random_range(8..14);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            words.push(WORDS[rng.random_range(0..WORDS.len())]);
        }
        let mut sentence = words.join(" ");
        if let Some(first) = sentence.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        out.push_str(&sentence);
        out.push_str(". ");
    }
    let a = WORDS[(uid % WORDS.len() as u64) as usize];
    let b = WORDS[((uid / WORDS.len() as u64) % WORDS.len() as u64) as usize];
    let c = WORDS[((uid / (WORDS.len() as u64 * WORDS.len() as u64)) % WORDS.len() as u64) as usize];
    out.push_str(&format!("This provision governs {a} {b} {c} matters."));
    out
}

/// Replaces about five percent of the characters in the middle of the text,
/// leaving the head intact.
fn edit_text(text: &str, rng: &mut ChaCha8Rng) -> String {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < 30 {
        return format!("{text} (amended)");
    }
    let mut chars = chars;
    let edits = (chars.len() / 20).max(1);
    for _ in 0..edits {
        let pos = rng.random_range(10..chars.len() - 1);
        if chars[pos].is_ascii_lowercase() {
            let shifted = ((chars[pos] as u8 - b'a' + 1) % 26) + b'a';
            chars[pos] = shifted as char;
        }
    }
    chars.into_iter().collect()
}

fn materialize(
    docs: &[Doc],
    collection_id: &str,
    year: i32,
) -> (Snapshot, BTreeMap<u64, String>) {
    let date = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let mut trees: Vec<DocumentTree> = Vec::new();
    let mut uid_to_id = BTreeMap::new();
    for doc in docs {
        let mut b = TreeBuilder::new(
            Some(doc.key.clone()),
            Some(doc.heading.clone()),
            date.to_string(),
            &doc.key,
        );
        let mut recorded: Vec<(u64, usize)> = Vec::new();
        for ch in &doc.chapters {
            b.open(ElementKind::Item, Some(ch.heading.clone()), None, false)
                .expect("item under document");
            for sec in &ch.sections {
                let key = format!("{}/{}", doc.key, sec.num);
                let idx = b
                    .open(
                        ElementKind::Seqitem,
                        Some(format!("§ {}", sec.num)),
                        Some(key),
                        false,
                    )
                    .expect("seqitem under item");
                if let Some(t) = &sec.own_text {
                    b.text(t).expect("text in seqitem");
                    recorded.push((sec.uid, idx));
                }
                for sub in &sec.subs {
                    let sidx = b
                        .open(ElementKind::Subseqitem, None, None, false)
                        .expect("subseqitem under seqitem");
                    b.text(&sub.text).expect("text in subseqitem");
                    recorded.push((sub.uid, sidx));
                    b.close();
                }
                b.close();
            }
            b.close();
        }
        let tree = b.finish().expect("synthetic tree is valid");
        for (uid, idx) in recorded {
            uid_to_id.insert(uid, tree.node(idx).id.clone());
        }
        trees.push(tree);
    }
    let snapshot = Snapshot::new(collection_id, date, trees).expect("synthetic snapshot is valid");
    (snapshot, uid_to_id)
}
