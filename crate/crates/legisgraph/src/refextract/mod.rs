//! Cross-reference extraction in three steps: find candidate citation
//! spans, parse them into cite keys, and align the keys against the
//! seqitems of the snapshot. Grammars are configurable per country via
//! [`CitationProfile`].

mod pattern;
mod profiles;

pub use pattern::Connector;
pub use profiles::{CitationProfile, ProfileDef};

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize_citekey, Snapshot, StructuralElement};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("unknown builtin profile {0}")]
    UnknownProfile(String),
    #[error("profile error: {0}")]
    Profile(String),
    #[error("pattern {pattern:?} failed to compile: {message}")]
    Pattern { pattern: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A candidate citation found in the text of one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSpan {
    pub element_id: String,
    /// Byte range into the element's own text.
    pub char_range: Range<usize>,
    pub raw: String,
    /// Index of the profile pattern that produced the match.
    pub pattern: usize,
}

/// One parsed citation key: target document plus unit numeral.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CiteKey {
    pub doc: String,
    pub section: String,
}

impl CiteKey {
    /// The snapshot-level cite key string, e.g. `42/1437f` or `BGB/26`.
    pub fn full(&self) -> String {
        normalize_citekey(&format!("{}/{}", self.doc, self.section))
    }
}

/// The cite keys derived from one span. A single span may carry several
/// keys ("sections 32, 33 and 38").
#[derive(Debug, Clone)]
pub struct CiteKeySet {
    pub span: ReferenceSpan,
    pub keys: Vec<CiteKey>,
}

/// Why a span or key failed to produce a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseIssue {
    /// Law name not in the profile's law-name index (reference to an
    /// instrument outside the collection).
    UnknownLaw(String),
    /// Numeral list could not be tokenized.
    MalformedNumeral(String),
    /// Reference without a document qualifier, and the profile does not
    /// resolve bare references against the source document.
    Unqualified,
}

/// A reference resolved to a seqitem of the same snapshot. One record per
/// key occurrence, so duplicate citations keep their multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedReference {
    pub source_id: String,
    pub target_id: String,
    pub cite_key: String,
}

/// Ambient context of the element whose text is being parsed.
#[derive(Debug, Clone, Copy)]
pub struct ParseContext<'a> {
    /// Key of the document containing the source element.
    pub ambient_doc_key: &'a str,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedCounts {
    pub unknown_law: u64,
    pub missing_target: u64,
    pub malformed_numeral: u64,
    pub unqualified: u64,
}

impl UnresolvedCounts {
    fn total(&self) -> u64 {
        self.unknown_law + self.missing_target + self.malformed_numeral + self.unqualified
    }

    fn merge(&mut self, other: &UnresolvedCounts) {
        self.unknown_law += other.unknown_law;
        self.missing_target += other.missing_target;
        self.malformed_numeral += other.malformed_numeral;
        self.unqualified += other.unqualified;
    }
}

/// Counts produced by [`extract_all`]; always emitted, never an error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub elements_scanned: u64,
    pub spans_found: u64,
    pub keys_parsed: u64,
    pub resolved: u64,
    pub unresolved: UnresolvedCounts,
}

impl ExtractionReport {
    pub fn unresolved_total(&self) -> u64 {
        self.unresolved.total()
    }
}

/// Finds maximal, non-overlapping citation spans in an element's text,
/// left to right. No matches is an empty list, not an error.
pub fn find_references(
    element: &StructuralElement,
    profile: &CitationProfile,
) -> Vec<ReferenceSpan> {
    find_in_text(&element.id, &element.text, profile)
}

fn find_in_text(element_id: &str, text: &str, profile: &CitationProfile) -> Vec<ReferenceSpan> {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new(); // (start, end, pattern)
    for (pi, re) in profile.pattern_set().patterns().iter().enumerate() {
        for m in re.find_iter(text) {
            candidates.push((m.start(), m.end(), pi));
        }
    }
    // Earlier start wins; on equal start the earlier pattern, then the
    // longer match.
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)).then(b.1.cmp(&a.1)));
    let mut spans = Vec::new();
    let mut last_end = 0;
    for (start, end, pattern) in candidates {
        if start < last_end {
            continue;
        }
        spans.push(ReferenceSpan {
            element_id: element_id.to_string(),
            char_range: start..end,
            raw: text[start..end].to_string(),
            pattern,
        });
        last_end = end;
    }
    spans
}

/// Parses a span into cite keys: expands enumerations and ranges,
/// resolves the target document from the qualifier or the ambient
/// context, and discards sub-section locators.
pub fn parse_span(
    span: &ReferenceSpan,
    profile: &CitationProfile,
    context: ParseContext<'_>,
) -> Result<CiteKeySet, ParseIssue> {
    let re = &profile.pattern_set().patterns()[span.pattern];
    let caps = re
        .captures(&span.raw)
        .ok_or_else(|| ParseIssue::MalformedNumeral(span.raw.clone()))?;

    let doc_key = if let Some(law) = caps
        .name("law")
        .or_else(|| caps.name("law_abbr"))
        .map(|m| m.as_str())
    {
        profile
            .resolve_law(law)
            .ok_or_else(|| ParseIssue::UnknownLaw(law.to_string()))?
    } else if let Some(num) = caps.name("doc_num") {
        num.as_str().to_string()
    } else if caps.name("doc_this").is_some() || profile.def.bare_references_ambient {
        context.ambient_doc_key.to_string()
    } else {
        return Err(ParseIssue::Unqualified);
    };

    let nums_text = caps
        .name("nums")
        .ok_or_else(|| ParseIssue::MalformedNumeral("pattern lacks nums group".to_string()))?
        .as_str();
    let tokens = profile
        .pattern_set()
        .tokenize_nums(nums_text)
        .map_err(ParseIssue::MalformedNumeral)?;

    let mut sections: Vec<String> = Vec::new();
    for (conn, num) in tokens {
        match conn {
            Some(Connector::Range) => {
                let prev = sections.pop().expect("range follows a numeral");
                match expand_range(&prev, &num) {
                    Some(mut expanded) => sections.append(&mut expanded),
                    None => {
                        // Endpoints with mixed suffix schemes stay as the
                        // two explicitly cited keys.
                        sections.push(prev);
                        sections.push(num);
                    }
                }
            }
            _ => sections.push(num),
        }
    }
    if sections.is_empty() {
        return Err(ParseIssue::MalformedNumeral(nums_text.to_string()));
    }
    let keys = sections
        .into_iter()
        .map(|section| CiteKey {
            doc: doc_key.clone(),
            section,
        })
        .collect();
    Ok(CiteKeySet {
        span: span.clone(),
        keys,
    })
}

/// Expands a numeric or same-prefix letter range. Returns `None` when the
/// endpoints do not share a suffix scheme.
fn expand_range(a: &str, b: &str) -> Option<Vec<String>> {
    const CAP: u64 = 500;
    if let (Ok(x), Ok(y)) = (a.parse::<u64>(), b.parse::<u64>()) {
        if x <= y && y - x <= CAP {
            return Some((x..=y).map(|v| v.to_string()).collect());
        }
        return None;
    }
    let split = |s: &str| -> Option<(String, char)> {
        let (head, tail) = s.split_at(s.len().checked_sub(1)?);
        let c = tail.chars().next()?;
        if c.is_ascii_lowercase() && head.ends_with(|h: char| h.is_ascii_digit()) {
            Some((head.to_string(), c))
        } else {
            None
        }
    };
    let (ha, ca) = split(a)?;
    let (hb, cb) = split(b)?;
    if ha == hb && ca <= cb {
        return Some((ca..=cb).map(|c| format!("{ha}{c}")).collect());
    }
    None
}

/// Aligns parsed keys against the snapshot's cite-key index. Keys that
/// resolve yield one [`ResolvedReference`] each (multiplicity preserved);
/// unresolved keys are returned for counting, never fabricated.
pub fn align_keys(
    keyset: &CiteKeySet,
    snapshot: &Snapshot,
) -> (Vec<ResolvedReference>, Vec<CiteKey>) {
    let mut resolved = Vec::new();
    let mut unresolved = Vec::new();
    for key in &keyset.keys {
        let full = key.full();
        match snapshot.resolve_citekey(&full) {
            Some(r) => resolved.push(ResolvedReference {
                source_id: keyset.span.element_id.clone(),
                target_id: snapshot.element(r).id.clone(),
                cite_key: full,
            }),
            None => unresolved.push(key.clone()),
        }
    }
    (resolved, unresolved)
}

/// Result of running extraction over a whole snapshot.
#[derive(Debug, Clone)]
pub struct ExtractionOutcome {
    pub references: Vec<ResolvedReference>,
    pub report: ExtractionReport,
}

/// Runs find → parse → align over every text-bearing element. Extraction
/// is parallel over elements with a deterministic, document-ordered
/// result; the report always comes back, regardless of diagnostics.
pub fn extract_all(snapshot: &Snapshot, profile: &CitationProfile) -> ExtractionOutcome {
    let bound;
    let profile = if profile.law_name_index.is_some() {
        profile
    } else {
        bound = profile.with_snapshot_laws(snapshot);
        &bound
    };
    let elements: Vec<(usize, &StructuralElement)> = snapshot
        .documents
        .iter()
        .enumerate()
        .flat_map(|(di, d)| d.iter().map(move |(_, n)| (di, n)))
        .filter(|(_, n)| !n.text.is_empty())
        .collect();

    let per_element: Vec<(Vec<ResolvedReference>, ExtractionReport)> = elements
        .par_iter()
        .map(|(di, element)| {
            let mut report = ExtractionReport {
                elements_scanned: 1,
                ..Default::default()
            };
            let context = ParseContext {
                ambient_doc_key: snapshot.documents[*di].doc_key(),
            };
            let mut resolved = Vec::new();
            for span in find_references(element, profile) {
                report.spans_found += 1;
                match parse_span(&span, profile, context) {
                    Ok(keyset) => {
                        report.keys_parsed += keyset.keys.len() as u64;
                        let (mut ok, missing) = align_keys(&keyset, snapshot);
                        report.resolved += ok.len() as u64;
                        report.unresolved.missing_target += missing.len() as u64;
                        resolved.append(&mut ok);
                    }
                    Err(ParseIssue::UnknownLaw(_)) => report.unresolved.unknown_law += 1,
                    Err(ParseIssue::MalformedNumeral(_)) => {
                        report.unresolved.malformed_numeral += 1
                    }
                    Err(ParseIssue::Unqualified) => report.unresolved.unqualified += 1,
                }
            }
            (resolved, report)
        })
        .collect();

    let mut references = Vec::new();
    let mut report = ExtractionReport::default();
    for (mut refs, r) in per_element {
        references.append(&mut refs);
        report.elements_scanned += r.elements_scanned;
        report.spans_found += r.spans_found;
        report.keys_parsed += r.keys_parsed;
        report.resolved += r.resolved;
        report.unresolved.merge(&r.unresolved);
    }
    ExtractionOutcome { references, report }
}
