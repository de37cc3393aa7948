//! Document model for legislative corpora.
//!
//! A corpus snapshot is a set of documents, each a rooted tree of structural
//! elements (`document`, `item`, `seqitem`, `subseqitem`). Text lives as node
//! content on `seqitem`/`subseqitem` elements, never as a node kind of its
//! own. Snapshots index seqitems by cite key and provide token and structure
//! accounting.

mod keys;
mod manifest;
pub mod synthetic;
pub mod uscode;
mod xml;

pub use keys::{compare_citekeys, normalize_citekey, KeyOrdering};
pub use manifest::{load_series, load_snapshot, write_snapshot, SnapshotManifest};
pub use xml::{parse_document, parse_document_with_key, serialize_document};

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors for parsing, validating, and accounting over corpora.
#[derive(Debug, Error)]
pub enum CorpusError {
    /// Malformed XML input.
    #[error("xml parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    /// Well-formed XML that does not conform to the canonical schema.
    #[error("schema error at byte {offset}: {message}")]
    Schema { offset: usize, message: String },
    /// Structural rule violated (e.g. subseqitem outside a seqitem).
    #[error("structure error: {0}")]
    Structure(String),
    /// Cross-element consistency violated (e.g. duplicate cite key).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// Reference statistics requested before reference resolution ran.
    #[error("references not resolved for snapshot {0}")]
    ReferencesNotResolved(String),
    /// Manifest file invalid.
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Kind of a structural element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Document,
    Item,
    Seqitem,
    Subseqitem,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Document => "document",
            ElementKind::Item => "item",
            ElementKind::Seqitem => "seqitem",
            ElementKind::Subseqitem => "subseqitem",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "document" => Some(ElementKind::Document),
            "item" => Some(ElementKind::Item),
            "seqitem" => Some(ElementKind::Seqitem),
            "subseqitem" => Some(ElementKind::Subseqitem),
            _ => None,
        }
    }
}

/// One node of a document tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralElement {
    /// Unique within a snapshot; derived from the document key and tree path.
    pub id: String,
    pub kind: ElementKind,
    /// Distance from the document root (root = 0).
    pub level: u32,
    pub heading: Option<String>,
    /// Normalized cite key; required for seqitems, absent otherwise.
    pub cite_key: Option<String>,
    /// Documents only.
    pub abbreviation: Option<String>,
    /// Own text content: the concatenation of this node's text children.
    pub text: String,
    /// Subtrees flagged as appendix are excluded from token statistics.
    pub appendix: bool,
}

/// Number of whitespace-delimited tokens in `text`.
///
/// A token is a maximal nonempty run of non-whitespace characters; all
/// Unicode whitespace delimits.
pub fn count_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// A parsed document: a rooted, ordered tree of structural elements.
///
/// Nodes are stored in document (preorder) order; index 0 is the root.
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentTree {
    nodes: Vec<StructuralElement>,
    parents: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// The document's `date` attribute, kept verbatim.
    pub date: String,
}

impl DocumentTree {
    pub fn root(&self) -> &StructuralElement {
        &self.nodes[0]
    }

    /// Key that identifies this document inside its collection: the
    /// abbreviation if present, otherwise the root id.
    pub fn doc_key(&self) -> &str {
        self.nodes[0]
            .abbreviation
            .as_deref()
            .unwrap_or(&self.nodes[0].id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, idx: usize) -> &StructuralElement {
        &self.nodes[idx]
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parents[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Nodes in document order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &StructuralElement)> {
        self.nodes.iter().enumerate()
    }

    /// Indices of all seqitems in document order.
    pub fn seqitem_indices(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == ElementKind::Seqitem)
            .map(|(i, _)| i)
            .collect()
    }

    /// Direct subseqitem children of a seqitem, in document order.
    pub fn subseqitems_of(&self, seq_idx: usize) -> Vec<usize> {
        self.children[seq_idx]
            .iter()
            .copied()
            .filter(|&c| self.nodes[c].kind == ElementKind::Subseqitem)
            .collect()
    }

    /// True if `idx` or any ancestor carries the appendix flag.
    pub fn in_appendix(&self, idx: usize) -> bool {
        let mut cur = Some(idx);
        while let Some(i) = cur {
            if self.nodes[i].appendix {
                return true;
            }
            cur = self.parents[i];
        }
        false
    }

    /// Preorder indices of the subtree rooted at `idx`. Appendix-flagged
    /// subtrees are skipped unless `include_appendix` is set.
    pub fn subtree_indices(&self, idx: usize, include_appendix: bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            if self.nodes[i].appendix && !include_appendix {
                continue;
            }
            out.push(i);
            // Reverse push keeps preorder on pop.
            for &c in self.children[i].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Concatenated own-texts of the subtree rooted at `idx`, in document
    /// order, joined by newlines (empty texts skipped).
    pub fn subtree_text(&self, idx: usize) -> String {
        let parts: Vec<&str> = self
            .subtree_indices(idx, true)
            .into_iter()
            .map(|i| self.nodes[i].text.as_str())
            .filter(|t| !t.is_empty())
            .collect();
        parts.join("\n")
    }

    /// Token count of the subtree rooted at `idx`. Appendix-flagged
    /// subtrees are skipped unless `include_appendix` is set.
    pub fn subtree_tokens(&self, idx: usize, include_appendix: bool) -> u64 {
        self.subtree_indices(idx, include_appendix)
            .into_iter()
            .map(|i| count_tokens(&self.nodes[i].text))
            .sum()
    }
}

/// Incremental construction of a [`DocumentTree`] with schema validation.
///
/// Used by the XML parser and by importers. Ids and levels are assigned on
/// `finish`; the id of a node is `<doc_key>:<path>` where path is the
/// dot-joined chain of child ordinals.
pub struct TreeBuilder {
    nodes: Vec<StructuralElement>,
    parents: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    stack: Vec<usize>,
    date: String,
    fallback_key: String,
}

impl TreeBuilder {
    pub fn new(
        abbreviation: Option<String>,
        heading: Option<String>,
        date: String,
        fallback_key: &str,
    ) -> Self {
        let root = StructuralElement {
            id: String::new(),
            kind: ElementKind::Document,
            level: 0,
            heading,
            cite_key: None,
            abbreviation,
            text: String::new(),
            appendix: false,
        };
        TreeBuilder {
            nodes: vec![root],
            parents: vec![None],
            children: vec![Vec::new()],
            stack: vec![0],
            date,
            fallback_key: fallback_key.to_string(),
        }
    }

    /// Opens a child element under the current node.
    pub fn open(
        &mut self,
        kind: ElementKind,
        heading: Option<String>,
        cite_key: Option<String>,
        appendix: bool,
    ) -> Result<usize, CorpusError> {
        let parent = *self.stack.last().expect("builder stack never empty");
        let parent_kind = self.nodes[parent].kind;
        let ok = match kind {
            ElementKind::Document => false,
            ElementKind::Item => {
                matches!(parent_kind, ElementKind::Document | ElementKind::Item)
            }
            ElementKind::Seqitem => {
                matches!(parent_kind, ElementKind::Document | ElementKind::Item)
            }
            ElementKind::Subseqitem => {
                matches!(parent_kind, ElementKind::Seqitem | ElementKind::Subseqitem)
            }
        };
        if !ok {
            return Err(CorpusError::Structure(format!(
                "{} may not appear under {}",
                kind.as_str(),
                parent_kind.as_str()
            )));
        }
        if kind == ElementKind::Seqitem && cite_key.is_none() {
            return Err(CorpusError::Structure(
                "seqitem requires a citekey".to_string(),
            ));
        }
        let idx = self.nodes.len();
        self.nodes.push(StructuralElement {
            id: String::new(),
            kind,
            level: self.nodes[parent].level + 1,
            heading,
            cite_key: cite_key.map(|k| normalize_citekey(&k)),
            abbreviation: None,
            text: String::new(),
            appendix,
        });
        self.parents.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(idx);
        self.stack.push(idx);
        Ok(idx)
    }

    /// Appends text content to the current node.
    pub fn text(&mut self, s: &str) -> Result<(), CorpusError> {
        let cur = *self.stack.last().expect("builder stack never empty");
        let kind = self.nodes[cur].kind;
        if !matches!(kind, ElementKind::Seqitem | ElementKind::Subseqitem) {
            return Err(CorpusError::Structure(format!(
                "text content is only allowed inside seqitem/subseqitem, found in {}",
                kind.as_str()
            )));
        }
        self.nodes[cur].text.push_str(s);
        Ok(())
    }

    pub fn close(&mut self) {
        debug_assert!(self.stack.len() > 1, "close without matching open");
        self.stack.pop();
    }

    /// Validates and finalizes the tree, assigning ids.
    pub fn finish(mut self) -> Result<DocumentTree, CorpusError> {
        let root_key = self.nodes[0]
            .abbreviation
            .clone()
            .unwrap_or_else(|| self.fallback_key.clone());
        self.nodes[0].id = root_key.clone();
        // Ids follow the tree path so they are stable under reserialization.
        let mut paths: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for idx in 0..self.nodes.len() {
            for (ord, &c) in self.children[idx].iter().enumerate() {
                let mut p = paths[idx].clone();
                p.push(ord);
                paths[c] = p;
            }
        }
        for idx in 1..self.nodes.len() {
            let path: Vec<String> = paths[idx].iter().map(|o| o.to_string()).collect();
            self.nodes[idx].id = format!("{}:{}", root_key, path.join("."));
        }
        // Duplicate cite keys within one document are an integrity error.
        let mut seen = BTreeMap::new();
        for n in &self.nodes {
            if let Some(key) = &n.cite_key {
                if let Some(prev) = seen.insert(key.clone(), n.id.clone()) {
                    return Err(CorpusError::Integrity(format!(
                        "duplicate cite key {key} ({prev} and {})",
                        n.id
                    )));
                }
            }
        }
        Ok(DocumentTree {
            nodes: self.nodes,
            parents: self.parents,
            children: self.children,
            date: self.date,
        })
    }
}

/// Locates an element inside a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElementRef {
    pub doc: usize,
    pub node: usize,
}

/// One country-year document collection plus derived indexes.
///
/// Immutable after construction; parsing of distinct documents may proceed
/// concurrently and snapshots are safe to share across readers.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub collection_id: String,
    pub date: NaiveDate,
    pub documents: Vec<DocumentTree>,
    citekey_index: BTreeMap<String, ElementRef>,
}

impl Snapshot {
    /// Assembles a snapshot, building the cite-key index.
    ///
    /// Fails if document keys collide or a cite key occurs twice across the
    /// collection.
    pub fn new(
        collection_id: impl Into<String>,
        date: NaiveDate,
        documents: Vec<DocumentTree>,
    ) -> Result<Self, CorpusError> {
        let collection_id = collection_id.into();
        let mut doc_keys = BTreeMap::new();
        for (i, d) in documents.iter().enumerate() {
            if let Some(prev) = doc_keys.insert(d.doc_key().to_string(), i) {
                return Err(CorpusError::Integrity(format!(
                    "duplicate document key {} (documents {prev} and {i})",
                    d.doc_key()
                )));
            }
        }
        let mut citekey_index = BTreeMap::new();
        for (di, d) in documents.iter().enumerate() {
            for (ni, n) in d.iter() {
                if let Some(key) = &n.cite_key {
                    let r = ElementRef { doc: di, node: ni };
                    if citekey_index.insert(key.clone(), r).is_some() {
                        return Err(CorpusError::Integrity(format!(
                            "cite key {key} occurs in more than one document"
                        )));
                    }
                }
            }
        }
        Ok(Snapshot {
            collection_id,
            date,
            documents,
            citekey_index,
        })
    }

    /// Cite key → element location. Covers every seqitem exactly once.
    pub fn citekey_index(&self) -> &BTreeMap<String, ElementRef> {
        &self.citekey_index
    }

    pub fn resolve_citekey(&self, key: &str) -> Option<ElementRef> {
        self.citekey_index.get(key).copied()
    }

    pub fn element(&self, r: ElementRef) -> &StructuralElement {
        self.documents[r.doc].node(r.node)
    }

    /// All elements in document order.
    pub fn elements(&self) -> impl Iterator<Item = (ElementRef, &StructuralElement)> {
        self.documents.iter().enumerate().flat_map(|(di, d)| {
            d.iter()
                .map(move |(ni, n)| (ElementRef { doc: di, node: ni }, n))
        })
    }

    /// Total number of structural elements including the collection meta root.
    pub fn structure_count(&self) -> u64 {
        1 + self.documents.iter().map(|d| d.len() as u64).sum::<u64>()
    }

    /// Token count over the whole snapshot, appendix subtrees excluded.
    pub fn token_count(&self) -> u64 {
        self.documents
            .iter()
            .map(|d| d.subtree_tokens(0, false))
            .sum()
    }
}

/// The three headline counts of a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub tokens: u64,
    pub structures: u64,
    pub references: u64,
}

/// Computes {tokens, structures, references} for a snapshot.
///
/// `resolved_references` is the cross-reference count produced by reference
/// extraction; passing `None` (stats requested before resolution) is a state
/// error. Appendix-flagged subtrees are excluded from the token count;
/// structures include every element plus the collection meta root.
pub fn snapshot_stats(
    snapshot: &Snapshot,
    resolved_references: Option<u64>,
) -> Result<SnapshotStats, CorpusError> {
    let references = resolved_references.ok_or_else(|| {
        CorpusError::ReferencesNotResolved(format!(
            "{} {}",
            snapshot.collection_id, snapshot.date
        ))
    })?;
    Ok(SnapshotStats {
        tokens: snapshot.token_count(),
        structures: snapshot.structure_count(),
        references,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mini_doc() -> DocumentTree {
        let mut b = TreeBuilder::new(
            Some("12".into()),
            Some("Title 12".into()),
            "2018-01-01".into(),
            "12",
        );
        b.open(ElementKind::Item, Some("Chapter 1".into()), None, false)
            .unwrap();
        b.open(
            ElementKind::Seqitem,
            Some("§ 101".into()),
            Some("12/101".into()),
            false,
        )
        .unwrap();
        b.text("Majority begins at the age of eighteen.").unwrap();
        b.close();
        b.open(
            ElementKind::Seqitem,
            Some("§ 102".into()),
            Some("12/102".into()),
            false,
        )
        .unwrap();
        b.open(ElementKind::Subseqitem, Some("(a)".into()), None, false)
            .unwrap();
        b.text("An owner of eligible low-income housing").unwrap();
        b.close();
        b.close();
        b.close();
        b.finish().unwrap()
    }

    #[test]
    fn count_tokens_whitespace_classes() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("An owner of eligible low-income housing"), 6);
        assert_eq!(count_tokens("a\tb\nc"), 3);
        assert_eq!(count_tokens("  leading and trailing  "), 3);
        assert_eq!(count_tokens("non\u{a0}breaking"), 2);
    }

    #[test]
    fn builder_assigns_levels_and_ids() {
        let d = mini_doc();
        assert_eq!(d.len(), 5);
        assert_eq!(d.root().level, 0);
        assert_eq!(d.node(1).level, 1);
        assert_eq!(d.node(2).level, 2);
        assert_eq!(d.node(2).id, "12:0.0");
        assert_eq!(d.node(4).id, "12:0.1.0");
        for (i, n) in d.iter().skip(1) {
            let p = d.parent(i).unwrap();
            assert_eq!(n.level, d.node(p).level + 1);
        }
    }

    #[test]
    fn subseqitem_outside_seqitem_rejected() {
        let mut b = TreeBuilder::new(None, None, "2000-01-01".into(), "d");
        let err = b
            .open(ElementKind::Subseqitem, None, None, false)
            .unwrap_err();
        assert!(matches!(err, CorpusError::Structure(_)));
    }

    #[test]
    fn duplicate_citekey_rejected() {
        let mut b = TreeBuilder::new(None, None, "2000-01-01".into(), "d");
        b.open(ElementKind::Seqitem, None, Some("d/1".into()), false)
            .unwrap();
        b.close();
        b.open(ElementKind::Seqitem, None, Some("d/1".into()), false)
            .unwrap();
        b.close();
        assert!(matches!(b.finish(), Err(CorpusError::Integrity(_))));
    }

    #[test]
    fn text_in_item_rejected() {
        let mut b = TreeBuilder::new(None, None, "2000-01-01".into(), "d");
        b.open(ElementKind::Item, None, None, false).unwrap();
        assert!(matches!(b.text("nope"), Err(CorpusError::Structure(_))));
    }

    #[test]
    fn snapshot_stats_counts_and_state_error() {
        let d = mini_doc();
        let snap = Snapshot::new(
            "us",
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            vec![d],
        )
        .unwrap();
        let stats = snapshot_stats(&snap, Some(3)).unwrap();
        assert_eq!(stats.structures, 6); // 5 nodes + meta root
        assert_eq!(stats.tokens, 7 + 6);
        assert_eq!(stats.references, 3);
        assert!(matches!(
            snapshot_stats(&snap, None),
            Err(CorpusError::ReferencesNotResolved(_))
        ));
    }

    #[test]
    fn empty_snapshot_stats() {
        let snap =
            Snapshot::new("us", NaiveDate::from_ymd_opt(1994, 1, 1).unwrap(), vec![]).unwrap();
        let stats = snapshot_stats(&snap, Some(0)).unwrap();
        assert_eq!(
            stats,
            SnapshotStats {
                tokens: 0,
                structures: 1,
                references: 0
            }
        );
    }

    #[test]
    fn appendix_tokens_excluded() {
        let mut b = TreeBuilder::new(None, None, "2000-01-01".into(), "d");
        b.open(ElementKind::Seqitem, None, Some("d/1".into()), false)
            .unwrap();
        b.text("one two three").unwrap();
        b.close();
        b.open(ElementKind::Item, None, None, true).unwrap();
        b.open(ElementKind::Seqitem, None, Some("d/2".into()), false)
            .unwrap();
        b.text("four five").unwrap();
        b.close();
        b.close();
        let d = b.finish().unwrap();
        assert_eq!(d.subtree_tokens(0, false), 3);
        assert_eq!(d.subtree_tokens(0, true), 5);
        assert!(d.in_appendix(3));
    }
}
