//! The four graph views of a snapshot.
//!
//! * hierarchy graph — containment arcs over all structural elements plus
//!   a collection meta root at level −1;
//! * reference graph — the hierarchy graph plus the cross-reference
//!   multiset between seqitems;
//! * sequence graph — seqitems (optionally merged under a merge condition)
//!   joined by bidirectional sequence arc pairs between key-adjacent nodes
//!   and by projected reference arcs; the subsequence variant replaces
//!   seqitems by their subseqitems where those exist;
//! * quotient graph — equivalence classes of an attribute-induced relation
//!   with arc multiplicities.
//!
//! All graphs are immutable after build; independent snapshots can build
//! concurrently.

pub mod graphml;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::corpus::{count_tokens, ElementKind, KeyOrdering, Snapshot};
use crate::refextract::ResolvedReference;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("mapping error: {0}")]
    Mapping(String),
}

/// One node of the hierarchy graph.
#[derive(Debug, Clone)]
pub struct HierarchyNode {
    pub element_id: String,
    /// `None` for the collection meta root.
    pub kind: Option<ElementKind>,
    /// Meta root sits at level −1.
    pub level: i32,
    pub cite_key: Option<String>,
    pub heading: Option<String>,
    /// Tokens of this node's own text.
    pub tokens: u64,
    /// True when the node or an ancestor carries the appendix flag.
    pub in_appendix: bool,
}

/// Containment arborescence over a snapshot, rooted at the meta root.
#[derive(Debug, Clone)]
pub struct HierarchyGraph {
    pub collection_id: String,
    nodes: Vec<HierarchyNode>,
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
    id_index: HashMap<String, u32>,
}

impl HierarchyGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, idx: u32) -> &HierarchyNode {
        &self.nodes[idx as usize]
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    pub fn parent(&self, idx: u32) -> Option<u32> {
        self.parent[idx as usize]
    }

    pub fn children(&self, idx: u32) -> &[u32] {
        &self.children[idx as usize]
    }

    pub fn index_of(&self, element_id: &str) -> Option<u32> {
        self.id_index.get(element_id).copied()
    }

    /// Containment arcs (parent → child) in node order.
    pub fn arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (1..self.nodes.len() as u32).map(|i| (self.parent[i as usize].expect("non-root"), i))
    }

    /// Indices of all seqitems, in document order.
    pub fn seqitems(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32)
            .filter(|&i| self.nodes[i as usize].kind == Some(ElementKind::Seqitem))
            .collect()
    }

    /// Length of the path between two nodes in the undirected tree.
    pub fn undirected_distance(&self, a: u32, b: u32) -> u32 {
        let (mut x, mut y) = (a, b);
        let mut d = 0;
        while self.nodes[x as usize].level > self.nodes[y as usize].level {
            x = self.parent[x as usize].expect("above meta root");
            d += 1;
        }
        while self.nodes[y as usize].level > self.nodes[x as usize].level {
            y = self.parent[y as usize].expect("above meta root");
            d += 1;
        }
        while x != y {
            x = self.parent[x as usize].expect("meta root is common");
            y = self.parent[y as usize].expect("meta root is common");
            d += 2;
        }
        d
    }

    /// Nearest ancestor (or self) of kind item whose heading starts with
    /// one of the given prefixes (case-insensitive); used by merge rules.
    pub fn ancestor_with_heading_prefix(&self, idx: u32, prefixes: &[&str]) -> Option<u32> {
        let mut cur = Some(idx);
        while let Some(i) = cur {
            let n = &self.nodes[i as usize];
            if n.kind == Some(ElementKind::Item) {
                if let Some(h) = &n.heading {
                    let lower = h.to_lowercase();
                    if prefixes.iter().any(|p| lower.starts_with(p)) {
                        return Some(i);
                    }
                }
            }
            cur = self.parent[i as usize];
        }
        None
    }

    /// Ancestor of `idx` at `level`, or `idx` itself if it sits above.
    pub fn ancestor_at_level(&self, idx: u32, level: i32) -> u32 {
        let mut cur = idx;
        while self.nodes[cur as usize].level > level {
            cur = self.parent[cur as usize].expect("walk ends at meta root");
        }
        cur
    }

    /// Document root containing `idx` (level 0 ancestor).
    pub fn document_root(&self, idx: u32) -> u32 {
        self.ancestor_at_level(idx, 0)
    }

    /// Covering seqitem of an element (self or nearest ancestor).
    pub fn covering_seqitem(&self, idx: u32) -> Option<u32> {
        let mut cur = Some(idx);
        while let Some(i) = cur {
            if self.nodes[i as usize].kind == Some(ElementKind::Seqitem) {
                return Some(i);
            }
            cur = self.parent[i as usize];
        }
        None
    }
}

/// Builds the hierarchy graph of a snapshot: all document trees joined
/// under a meta root at level −1.
pub fn build_hierarchy(snapshot: &Snapshot) -> HierarchyGraph {
    let meta_id = format!("{}::root", snapshot.collection_id);
    let mut nodes = vec![HierarchyNode {
        element_id: meta_id.clone(),
        kind: None,
        level: -1,
        cite_key: None,
        heading: None,
        tokens: 0,
        in_appendix: false,
    }];
    let mut parent: Vec<Option<u32>> = vec![None];
    let mut children: Vec<Vec<u32>> = vec![Vec::new()];
    let mut id_index = HashMap::new();
    id_index.insert(meta_id, 0u32);

    for doc in &snapshot.documents {
        let mut local_to_global: Vec<u32> = Vec::with_capacity(doc.len());
        for (ni, el) in doc.iter() {
            let g = nodes.len() as u32;
            nodes.push(HierarchyNode {
                element_id: el.id.clone(),
                kind: Some(el.kind),
                level: el.level as i32,
                cite_key: el.cite_key.clone(),
                heading: el.heading.clone(),
                tokens: count_tokens(&el.text),
                in_appendix: doc.in_appendix(ni),
            });
            let p = match doc.parent(ni) {
                Some(pi) => local_to_global[pi],
                None => 0,
            };
            parent.push(Some(p));
            children.push(Vec::new());
            children[p as usize].push(g);
            id_index.insert(el.id.clone(), g);
            local_to_global.push(g);
        }
    }
    HierarchyGraph {
        collection_id: snapshot.collection_id.clone(),
        nodes,
        parent,
        children,
        id_index,
    }
}

/// Hierarchy graph plus the cross-reference multiset.
#[derive(Debug, Clone)]
pub struct ReferenceGraph {
    pub hierarchy: HierarchyGraph,
    /// One entry per reference occurrence (seqitem → seqitem), so
    /// multiplicities are the entry counts.
    pub cross_refs: Vec<(u32, u32)>,
}

impl ReferenceGraph {
    /// All arcs: containment plus cross references.
    pub fn arc_count(&self) -> usize {
        self.hierarchy.arc_count() + self.cross_refs.len()
    }

    /// Cross-reference multiplicities keyed by (source, target).
    pub fn cross_ref_multiplicities(&self) -> BTreeMap<(u32, u32), u64> {
        let mut m = BTreeMap::new();
        for &(s, t) in &self.cross_refs {
            *m.entry((s, t)).or_insert(0) += 1;
        }
        m
    }
}

/// Attaches resolved references to a hierarchy graph. Sources are lifted
/// to their covering seqitem; both endpoints must exist in the node set.
pub fn build_reference(
    hierarchy: HierarchyGraph,
    resolved: &[ResolvedReference],
) -> Result<ReferenceGraph, GraphError> {
    let mut cross_refs = Vec::with_capacity(resolved.len());
    for r in resolved {
        let s = hierarchy.index_of(&r.source_id).ok_or_else(|| {
            GraphError::Integrity(format!("reference source {} not in node set", r.source_id))
        })?;
        let t = hierarchy.index_of(&r.target_id).ok_or_else(|| {
            GraphError::Integrity(format!("reference target {} not in node set", r.target_id))
        })?;
        let s = hierarchy.covering_seqitem(s).ok_or_else(|| {
            GraphError::Integrity(format!(
                "reference source {} has no covering seqitem",
                r.source_id
            ))
        })?;
        if hierarchy.node(t).kind != Some(ElementKind::Seqitem) {
            return Err(GraphError::Integrity(format!(
                "reference target {} is not a seqitem",
                r.target_id
            )));
        }
        cross_refs.push((s, t));
    }
    Ok(ReferenceGraph {
        hierarchy,
        cross_refs,
    })
}

/// Node granularity of a sequence graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Seqitem,
    /// Seqitems are replaced by their direct subseqitems where those
    /// exist.
    Subseqitem,
}

/// Merge condition ρ: which neighbouring sequence nodes collapse into one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MergeRule {
    /// Condense nothing.
    None,
    /// All rules from the same Chapter, or the Title (document) when it
    /// has no Chapters. Chapters are items whose heading starts with
    /// "chapter".
    ChapterOrTitle,
    /// All rules from the same Book, or the law (document) when it has no
    /// Books. Books are items whose heading starts with "book"/"buch".
    BookOrLaw,
    /// Group by the ancestor at a fixed level (attribute-path selector).
    AncestorLevel(u32),
}

impl MergeRule {
    /// Group key of a seqitem under this rule; the key is the element id
    /// of the group's defining ancestor.
    pub fn group_key(&self, h: &HierarchyGraph, seqitem: u32) -> String {
        let anchor = match self {
            MergeRule::None => seqitem,
            MergeRule::ChapterOrTitle => h
                .ancestor_with_heading_prefix(seqitem, &["chapter"])
                .unwrap_or_else(|| h.document_root(seqitem)),
            MergeRule::BookOrLaw => h
                .ancestor_with_heading_prefix(seqitem, &["book", "buch"])
                .unwrap_or_else(|| h.document_root(seqitem)),
            MergeRule::AncestorLevel(l) => h.ancestor_at_level(seqitem, *l as i32),
        };
        h.node(anchor).element_id.clone()
    }
}

/// Weight decay of sequence arcs as a function of hierarchy distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDecay {
    /// `2^{-(d-2)/2}`: adjacent siblings weigh 1, each extra hop halves
    /// the weight every two steps.
    RootTwo,
    /// `base^{-(d-2)}`.
    Exponential { base: f64 },
    /// Distance-independent weight 1.
    Uniform,
}

impl WeightDecay {
    pub fn weight(&self, d: u32) -> f64 {
        match self {
            WeightDecay::RootTwo => 2f64.powf(-((d as f64 - 2.0) / 2.0)),
            WeightDecay::Exponential { base } => base.powf(-(d as f64 - 2.0)),
            WeightDecay::Uniform => 1.0,
        }
    }
}

/// Parameters of a sequence graph build.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceParams {
    pub rho: MergeRule,
    pub decay: WeightDecay,
    /// Reference-arc weight as a fraction of the maximum sequence weight.
    pub alpha: f64,
    /// Comparator establishing the cite-key sequence within documents.
    pub key_ordering: KeyOrdering,
}

impl Default for SequenceParams {
    fn default() -> Self {
        SequenceParams {
            rho: MergeRule::None,
            decay: WeightDecay::RootTwo,
            alpha: 0.5,
            key_ordering: KeyOrdering::Natural,
        }
    }
}

/// One (possibly merged) node of a sequence graph.
#[derive(Debug, Clone)]
pub struct SeqNode {
    /// Element id of the first member.
    pub id: String,
    /// Hierarchy indices of the member units, in document order.
    pub members: Vec<u32>,
    /// Cite key of the first member (derived keys for subseqitem units).
    pub key: String,
    /// Merge-group key under ρ.
    pub group_key: String,
    /// Σ subtree tokens of the members, appendix excluded.
    pub tokens: u64,
    /// Concatenated member texts in document order.
    pub text: String,
}

/// A bidirectional sequence arc pair is stored as two directed arcs of
/// equal weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceArc {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
}

/// Sequence (or subsequence) graph with recorded parameters.
#[derive(Debug, Clone)]
pub struct SequenceGraph {
    pub granularity: Granularity,
    pub params: SequenceParams,
    pub nodes: Vec<SeqNode>,
    pub sequence_arcs: Vec<SequenceArc>,
    /// Projected reference arcs, one per occurrence, each of weight
    /// `alpha * w_max`.
    pub reference_arcs: Vec<(u32, u32)>,
    pub reference_weight: f64,
}

impl SequenceGraph {
    pub fn node_index_by_id(&self) -> HashMap<&str, u32> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i as u32))
            .collect()
    }
}

pub type SubsequenceGraph = SequenceGraph;

/// Builds the sequence graph (seqitem granularity).
pub fn build_sequence(
    refgraph: &ReferenceGraph,
    snapshot: &Snapshot,
    params: SequenceParams,
) -> Result<SequenceGraph, GraphError> {
    build_seq_graph(refgraph, snapshot, params, Granularity::Seqitem)
}

/// Builds the subsequence graph: seqitems are replaced by their direct
/// subseqitems where those exist; a reference to such a seqitem targets
/// its first subseqitem.
pub fn build_subsequence(
    refgraph: &ReferenceGraph,
    snapshot: &Snapshot,
    params: SequenceParams,
) -> Result<SubsequenceGraph, GraphError> {
    build_seq_graph(refgraph, snapshot, params, Granularity::Subseqitem)
}

fn build_seq_graph(
    refgraph: &ReferenceGraph,
    snapshot: &Snapshot,
    params: SequenceParams,
    granularity: Granularity,
) -> Result<SequenceGraph, GraphError> {
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(GraphError::Parameter(format!(
            "alpha must lie in (0, 1], got {}",
            params.alpha
        )));
    }
    let h = &refgraph.hierarchy;

    // Units in global order: documents in collection order, units in
    // cite-key order within each document (which equals document order
    // for well-formed corpora).
    struct Unit {
        hier_idx: u32,
        key: String,
        group: String,
        tokens: u64,
        text: String,
        /// Covering seqitem, for reference projection.
        seqitem: u32,
    }
    let mut units: Vec<Unit> = Vec::new();
    // Maps for reference projection.
    let mut seqitem_to_first_unit: HashMap<u32, u32> = HashMap::new();

    for (di, doc) in snapshot.documents.iter().enumerate() {
        let mut doc_units: Vec<Unit> = Vec::new();
        let mut seq_indices = doc.seqitem_indices();
        // Cite-key order within the document.
        seq_indices.sort_by(|&a, &b| {
            params.key_ordering.compare(
                doc.node(a).cite_key.as_deref().unwrap_or(""),
                doc.node(b).cite_key.as_deref().unwrap_or(""),
            )
        });
        for si in seq_indices {
            let el = doc.node(si);
            let seq_hier = h
                .index_of(&el.id)
                .ok_or_else(|| GraphError::Integrity(format!("{} missing from hierarchy", el.id)))?;
            let seq_key = el.cite_key.clone().unwrap_or_default();
            let group = params.rho.group_key(h, seq_hier);
            let subs = doc.subseqitems_of(si);
            let use_subs = granularity == Granularity::Subseqitem && !subs.is_empty();
            if use_subs {
                for (ord, &sub) in subs.iter().enumerate() {
                    let sel = doc.node(sub);
                    let sub_hier = h.index_of(&sel.id).expect("subseqitem in hierarchy");
                    let mut text = doc.subtree_text(sub);
                    let mut tokens = doc.subtree_tokens(sub, false);
                    if ord == 0 && !el.text.is_empty() {
                        // A seqitem's own (chapeau) text rides with its
                        // first unit.
                        text = if text.is_empty() {
                            el.text.clone()
                        } else {
                            format!("{}\n{}", el.text, text)
                        };
                        tokens += count_tokens(&el.text);
                    }
                    doc_units.push(Unit {
                        hier_idx: sub_hier,
                        key: format!("{seq_key}#{ord}"),
                        group: group.clone(),
                        tokens,
                        text,
                        seqitem: seq_hier,
                    });
                }
            } else {
                doc_units.push(Unit {
                    hier_idx: seq_hier,
                    key: seq_key,
                    group: group.clone(),
                    tokens: doc.subtree_tokens(si, false),
                    text: doc.subtree_text(si),
                    seqitem: seq_hier,
                });
            }
        }
        let _ = di;
        units.extend(doc_units);
    }
    for (ui, u) in units.iter().enumerate() {
        seqitem_to_first_unit.entry(u.seqitem).or_insert(ui as u32);
    }

    // Merge consecutive units sharing a group key.
    let mut nodes: Vec<SeqNode> = Vec::new();
    let mut unit_to_node: Vec<u32> = vec![0; units.len()];
    for (ui, u) in units.iter().enumerate() {
        let start_new = match nodes.last() {
            Some(last) if params.rho != MergeRule::None => last.group_key != u.group,
            Some(_) => true,
            None => true,
        };
        if start_new {
            nodes.push(SeqNode {
                id: h.node(u.hier_idx).element_id.clone(),
                members: vec![u.hier_idx],
                key: u.key.clone(),
                group_key: u.group.clone(),
                tokens: u.tokens,
                text: u.text.clone(),
            });
        } else {
            let last = nodes.last_mut().expect("non-empty");
            last.members.push(u.hier_idx);
            last.tokens += u.tokens;
            if !u.text.is_empty() {
                if !last.text.is_empty() {
                    last.text.push('\n');
                }
                last.text.push_str(&u.text);
            }
        }
        unit_to_node[ui] = nodes.len() as u32 - 1;
    }

    // Sequence arcs between consecutive merged nodes; distance taken
    // between the boundary members.
    let mut sequence_arcs = Vec::new();
    for w in unit_to_node.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let last_of_a = *nodes[a as usize].members.last().expect("non-empty node");
        let first_of_b = nodes[b as usize].members[0];
        let d = h.undirected_distance(last_of_a, first_of_b);
        let weight = params.decay.weight(d);
        if weight <= 0.0 || !weight.is_finite() {
            return Err(GraphError::Parameter(format!(
                "sequence weight w({d}) = {weight} must be positive"
            )));
        }
        sequence_arcs.push(SequenceArc {
            source: a,
            target: b,
            weight,
        });
        sequence_arcs.push(SequenceArc {
            source: b,
            target: a,
            weight,
        });
    }

    // Project reference arcs onto merged nodes; self-arcs and
    // multiplicities are kept.
    let w_max = params.decay.weight(2);
    let reference_weight = params.alpha * w_max;
    let mut reference_arcs = Vec::with_capacity(refgraph.cross_refs.len());
    for &(s, t) in &refgraph.cross_refs {
        let su = seqitem_to_first_unit.get(&s).copied().ok_or_else(|| {
            GraphError::Integrity(format!(
                "reference source seqitem {} has no sequence unit",
                h.node(s).element_id
            ))
        })?;
        let tu = seqitem_to_first_unit.get(&t).copied().ok_or_else(|| {
            GraphError::Integrity(format!(
                "reference target seqitem {} has no sequence unit",
                h.node(t).element_id
            ))
        })?;
        reference_arcs.push((unit_to_node[su as usize], unit_to_node[tu as usize]));
    }

    Ok(SequenceGraph {
        granularity,
        params,
        nodes,
        sequence_arcs,
        reference_arcs,
        reference_weight,
    })
}

/// One equivalence class of a quotient graph.
#[derive(Debug, Clone)]
pub struct QuotientClass {
    /// The shared attribute value.
    pub key: String,
    /// Hierarchy node indices of the members.
    pub members: Vec<u32>,
    /// Σ own-text tokens of members outside appendices.
    pub tokens: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientArc {
    pub source: u32,
    pub target: u32,
    pub multiplicity: u64,
}

/// Quotient of a reference graph under an attribute-induced relation.
#[derive(Debug, Clone)]
pub struct QuotientGraph {
    pub classes: Vec<QuotientClass>,
    pub arcs: Vec<QuotientArc>,
}

/// Which arcs of the reference graph feed the quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcSet {
    /// Containment and cross-reference arcs.
    All,
    /// Cross-reference arcs only.
    CrossReferencesOnly,
}

/// Builds the quotient graph: classes are the distinct selector values,
/// arcs carry the number of crossing source arcs (self-arcs included).
/// The selector must be total on nodes; `None` is a mapping error.
pub fn quotient(
    refgraph: &ReferenceGraph,
    selector: &dyn Fn(&HierarchyGraph, u32) -> Option<String>,
    arc_set: ArcSet,
) -> Result<QuotientGraph, GraphError> {
    let h = &refgraph.hierarchy;
    let mut class_of: Vec<u32> = Vec::with_capacity(h.node_count());
    let mut class_index: BTreeMap<String, u32> = BTreeMap::new();
    let mut classes: Vec<QuotientClass> = Vec::new();
    for i in 0..h.node_count() as u32 {
        let key = selector(h, i).ok_or_else(|| {
            GraphError::Mapping(format!(
                "selector undefined for node {}",
                h.node(i).element_id
            ))
        })?;
        let c = *class_index.entry(key.clone()).or_insert_with(|| {
            classes.push(QuotientClass {
                key,
                members: Vec::new(),
                tokens: 0,
            });
            classes.len() as u32 - 1
        });
        classes[c as usize].members.push(i);
        if !h.node(i).in_appendix {
            classes[c as usize].tokens += h.node(i).tokens;
        }
        class_of.push(c);
    }

    let mut mult: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    if arc_set == ArcSet::All {
        for (p, c) in h.arcs() {
            *mult
                .entry((class_of[p as usize], class_of[c as usize]))
                .or_insert(0) += 1;
        }
    }
    for &(s, t) in &refgraph.cross_refs {
        *mult
            .entry((class_of[s as usize], class_of[t as usize]))
            .or_insert(0) += 1;
    }
    let arcs = mult
        .into_iter()
        .map(|((source, target), multiplicity)| QuotientArc {
            source,
            target,
            multiplicity,
        })
        .collect();
    Ok(QuotientGraph { classes, arcs })
}

/// Selector grouping every element under its merge-rule anchor (e.g. all
/// nodes below one Chapter share that Chapter's class; the document root
/// and the meta root stay in classes of their own).
pub fn merge_rule_selector(rule: MergeRule) -> impl Fn(&HierarchyGraph, u32) -> Option<String> {
    move |h, i| Some(rule.group_key(h, i))
}
