//! Citation-grammar profiles.
//!
//! A profile is pure data (JSON or TOML): marker tokens, connector tokens,
//! regex fragments, and find patterns written in the pattern language of
//! [`super::pattern`]. The builtin `us` and `de` profiles ship as JSON
//! files compiled into the binary; the same files parse from disk, so
//! custom grammars need no code changes.
//!
//! Policy choices encoded in the builtins:
//!
//! * Bare references without a document qualifier ("section 101",
//!   "§ 26") resolve against the source document.
//! * US references into named acts ("of the Social Security Act") are
//!   law-name references; with an empty law-name index they are dropped
//!   and counted, mirroring the treatment of instruments outside the
//!   collection.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pattern::{literal_alternation, PatternSet};
use super::ExtractError;
use crate::corpus::{KeyOrdering, Snapshot};

const US_PROFILE: &str = include_str!("../../profiles/us.json");
const DE_PROFILE: &str = include_str!("../../profiles/de.json");

/// On-disk profile definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDef {
    pub name: String,
    #[serde(default)]
    pub key_ordering: KeyOrdering,
    /// Trigger tokens that open a citation (e.g. `§`, `Art.`, `section`).
    pub reference_markers: Vec<String>,
    pub list_connectors: Vec<String>,
    pub range_connectors: Vec<String>,
    /// Resolve unqualified references against the source document.
    #[serde(default = "default_true")]
    pub bare_references_ambient: bool,
    pub fragments: BTreeMap<String, String>,
    pub patterns: Vec<String>,
    /// Static law-name aliases (name → document key), merged with the
    /// names discovered in a snapshot.
    #[serde(default)]
    pub law_aliases: BTreeMap<String, String>,
}

fn default_true() -> bool {
    true
}

/// A compiled citation grammar, optionally bound to a snapshot's law names.
#[derive(Debug, Clone)]
pub struct CitationProfile {
    pub def: ProfileDef,
    pub(super) patterns: PatternSet,
    /// Law name or abbreviation → document key, valid at the snapshot
    /// date. `None` until bound with [`CitationProfile::with_snapshot_laws`].
    pub law_name_index: Option<BTreeMap<String, String>>,
}

impl CitationProfile {
    /// Loads one of the builtin profiles (`us`, `de`).
    pub fn builtin(name: &str) -> Result<Self, ExtractError> {
        let raw = match name {
            "us" => US_PROFILE,
            "de" => DE_PROFILE,
            other => return Err(ExtractError::UnknownProfile(other.to_string())),
        };
        let def: ProfileDef = serde_json::from_str(raw)
            .map_err(|e| ExtractError::Profile(format!("builtin {name}: {e}")))?;
        Self::compile(def)
    }

    /// Loads a profile from a `.json` or `.toml` file.
    pub fn from_file(path: &Path) -> Result<Self, ExtractError> {
        let raw = std::fs::read_to_string(path).map_err(|e| ExtractError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let def: ProfileDef = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&raw)
                .map_err(|e| ExtractError::Profile(format!("{}: {e}", path.display())))?,
            _ => serde_json::from_str(&raw)
                .map_err(|e| ExtractError::Profile(format!("{}: {e}", path.display())))?,
        };
        Self::compile(def)
    }

    /// Compiles a definition: builds the `marker`, `conn`, and `numlist`
    /// fragments from the token lists and compiles all patterns.
    pub fn compile(def: ProfileDef) -> Result<Self, ExtractError> {
        if def.reference_markers.is_empty() {
            return Err(ExtractError::Profile(
                "profile needs at least one reference marker".to_string(),
            ));
        }
        let mut fragments = def.fragments.clone();
        fragments.insert("marker".to_string(), literal_alternation(&def.reference_markers));
        let list_conn = connector_regex(&def.list_connectors);
        let range_conn = connector_regex(&def.range_connectors);
        fragments.insert(
            "conn".to_string(),
            format!("(?:{list_conn}|{range_conn})"),
        );
        fragments
            .entry("numlist".to_string())
            .or_insert_with(|| "{numloc}(?:{conn}{numloc})*".to_string());
        let patterns = PatternSet::compile(&def.patterns, &fragments, &list_conn, &range_conn)?;
        Ok(CitationProfile {
            def,
            patterns,
            law_name_index: None,
        })
    }

    /// Binds the profile to the laws of a snapshot: document abbreviations
    /// and headings become law names, and static aliases are kept when
    /// their target document exists in the snapshot.
    pub fn with_snapshot_laws(&self, snapshot: &Snapshot) -> Self {
        let mut index = BTreeMap::new();
        let mut doc_keys = std::collections::BTreeSet::new();
        for doc in &snapshot.documents {
            let key = doc.doc_key().to_string();
            doc_keys.insert(key.clone());
            index.insert(key.clone(), key.clone());
            if let Some(h) = &doc.root().heading {
                index.insert(h.clone(), key.clone());
            }
        }
        for (alias, target) in &self.def.law_aliases {
            if doc_keys.contains(target) {
                index.insert(alias.clone(), target.clone());
            }
        }
        CitationProfile {
            def: self.def.clone(),
            patterns: self.patterns.clone(),
            law_name_index: Some(index),
        }
    }

    /// Resolves a cited law name to a document key: exact match, then
    /// case-insensitive, then with a trailing genitive `s`/`es` stripped.
    pub fn resolve_law(&self, name: &str) -> Option<String> {
        let index = self.law_name_index.as_ref()?;
        let name = name.trim();
        if let Some(k) = index.get(name) {
            return Some(k.clone());
        }
        let lower = name.to_lowercase();
        for (n, k) in index {
            if n.to_lowercase() == lower {
                return Some(k.clone());
            }
        }
        for stripped in [name.strip_suffix("es"), name.strip_suffix('s')]
            .into_iter()
            .flatten()
        {
            if let Some(k) = index.get(stripped) {
                return Some(k.clone());
            }
        }
        None
    }

    pub(super) fn pattern_set(&self) -> &PatternSet {
        &self.patterns
    }
}

/// Connector tokens → regex alternation. A comma may be followed by a word
/// connector ("32, and 38"); word connectors require surrounding space.
fn connector_regex(tokens: &[String]) -> String {
    let mut words = Vec::new();
    let mut symbols = Vec::new();
    for t in tokens {
        if t.chars().all(|c| c.is_alphabetic()) {
            words.push(regex::escape(t));
        } else if t != "," {
            symbols.push(regex::escape(t));
        }
    }
    let mut parts = Vec::new();
    let word_alt = words.join("|");
    if tokens.iter().any(|t| t == ",") {
        if word_alt.is_empty() {
            parts.push(r"\s*,\s*".to_string());
        } else {
            parts.push(format!(r"\s*,\s*(?:(?:{word_alt})\s+)?"));
        }
    }
    if !word_alt.is_empty() {
        parts.push(format!(r"\s+(?:{word_alt})\s+"));
    }
    if !symbols.is_empty() {
        parts.push(format!(r"\s*(?:{})\s*", symbols.join("|")));
    }
    if parts.is_empty() {
        // Unmatchable: a connector class with no tokens.
        parts.push("[^\\s\\S]".to_string());
    }
    format!("(?:{})", parts.join("|"))
}
