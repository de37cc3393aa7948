//! Temporal dynamics: aligning nodes across adjacent snapshots and
//! tracing token flow between clusters over time.
//!
//! Node alignment is a four-pass heuristic over subsequence graphs built
//! at maximal granularity (merge condition that condenses nothing):
//!
//! 1. unique identical text of at least 50 characters;
//! 2. identical key and identical text;
//! 3. unique containment where the unmatched remainder is shorter than
//!    the matched part;
//! 4. recursive neighbourhood search: among unmatched nodes within five
//!    hops of the image of a matched five-hop neighbour, the one with the
//!    largest Jaro-Winkler similarity above 0.9.
//!
//! On top of the alignments sit the cluster graph (token flow between
//! clusters of adjacent years), the family graph (flows that carry at
//! least a γ share of both endpoint clusters), cluster families
//! (connected components, ordered by leading-cluster size), and per-year
//! family sizes.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{Clustering, UnionFind};
use crate::graphs::{HierarchyGraph, SequenceGraph, SubsequenceGraph};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("integrity error: {0}")]
    Integrity(String),
}

/// Jaro similarity over characters.
pub fn jaro(a: &str, b: &str) -> f64 {
    let sa: Vec<char> = a.chars().collect();
    let sb: Vec<char> = b.chars().collect();
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    if sa.is_empty() || sb.is_empty() {
        return 0.0;
    }
    let window = (sa.len().max(sb.len()) / 2).saturating_sub(1);
    let mut match_a = vec![false; sa.len()];
    let mut match_b = vec![false; sb.len()];
    let mut matches = 0usize;
    for i in 0..sa.len() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(sb.len());
        for j in lo..hi {
            if !match_b[j] && sa[i] == sb[j] {
                match_a[i] = true;
                match_b[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut transpositions = 0usize;
    let mut k = 0usize;
    for i in 0..sa.len() {
        if !match_a[i] {
            continue;
        }
        while !match_b[k] {
            k += 1;
        }
        if sa[i] != sb[k] {
            transpositions += 1;
        }
        k += 1;
    }
    let m = matches as f64;
    (m / sa.len() as f64 + m / sb.len() as f64 + (m - transpositions as f64 / 2.0) / m) / 3.0
}

/// Jaro-Winkler similarity: Jaro with a common-prefix boost (prefix
/// length capped at 4, scaling factor 0.1, applied above 0.7).
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let j = jaro(a, b);
    if j <= 0.7 {
        return j;
    }
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(4)
        .take_while(|(x, y)| x == y)
        .count();
    j + prefix as f64 * 0.1 * (1.0 - j)
}

/// Which pass matched a node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlignPass {
    /// Pass 1: unique identical text of ≥ 50 characters.
    ExactText,
    /// Pass 2: identical key and identical text.
    KeyAndText,
    /// Pass 3: unique containment with minority remainder.
    Containment,
    /// Pass 4: five-hop neighbourhood Jaro-Winkler above 0.9.
    NeighborhoodSimilarity,
}

impl AlignPass {
    pub fn number(self) -> u8 {
        match self {
            AlignPass::ExactText => 1,
            AlignPass::KeyAndText => 2,
            AlignPass::Containment => 3,
            AlignPass::NeighborhoodSimilarity => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignedPair {
    pub source: u32,
    pub target: u32,
    pub pass: AlignPass,
}

/// A partial, injective map from nodes at t to nodes at t+1.
#[derive(Debug, Clone, Default)]
pub struct NodeAlignment {
    pub matches: Vec<AlignedPair>,
    pub unmatched_source: Vec<u32>,
    pub unmatched_target: Vec<u32>,
}

impl NodeAlignment {
    pub fn mapping(&self) -> BTreeMap<u32, u32> {
        self.matches.iter().map(|p| (p.source, p.target)).collect()
    }

    /// Matched share of source nodes.
    pub fn coverage(&self) -> f64 {
        let total = self.matches.len() + self.unmatched_source.len();
        if total == 0 {
            1.0
        } else {
            self.matches.len() as f64 / total as f64
        }
    }
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Undirected adjacency over sequence and reference arcs.
fn adjacency(g: &SequenceGraph) -> Vec<Vec<u32>> {
    let n = g.nodes.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut push = |a: u32, b: u32| {
        if a != b {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
    };
    for a in &g.sequence_arcs {
        push(a.source, a.target);
    }
    for &(s, t) in &g.reference_arcs {
        push(s, t);
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn within_hops(adj: &[Vec<u32>], start: u32, hops: usize) -> Vec<u32> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen[start as usize] = true;
    queue.push_back((start, 0usize));
    while let Some((v, d)) = queue.pop_front() {
        out.push(v);
        if d == hops {
            continue;
        }
        for &w in &adj[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back((w, d + 1));
            }
        }
    }
    out
}

const PASS1_MIN_CHARS: usize = 50;
const PASS4_HOPS: usize = 5;
const PASS4_THRESHOLD: f64 = 0.9;

/// Aligns the nodes of two adjacent subsequence graphs. Passes run
/// strictly in order; each pass only consumes nodes unmatched by earlier
/// passes, and the map stays injective throughout.
pub fn align_nodes(source: &SubsequenceGraph, target: &SubsequenceGraph) -> NodeAlignment {
    let ns = source.nodes.len();
    let nt = target.nodes.len();
    let mut matched_source: Vec<Option<AlignedPair>> = vec![None; ns];
    let mut taken_target = vec![false; nt];
    let record = |ms: &mut Vec<Option<AlignedPair>>, tt: &mut Vec<bool>, v: u32, w: u32, pass: AlignPass| {
        ms[v as usize] = Some(AlignedPair {
            source: v,
            target: w,
            pass,
        });
        tt[w as usize] = true;
    };

    // Pass 1: text unique on both sides and at least 50 characters.
    {
        let mut by_text_source: HashMap<&str, Vec<u32>> = HashMap::new();
        for (i, n) in source.nodes.iter().enumerate() {
            by_text_source.entry(&n.text).or_default().push(i as u32);
        }
        let mut by_text_target: HashMap<&str, Vec<u32>> = HashMap::new();
        for (i, n) in target.nodes.iter().enumerate() {
            by_text_target.entry(&n.text).or_default().push(i as u32);
        }
        // Tied candidates on either side disqualify the text entirely.
        for (i, n) in source.nodes.iter().enumerate() {
            if char_len(&n.text) < PASS1_MIN_CHARS {
                continue;
            }
            let sources = &by_text_source[n.text.as_str()];
            if sources.len() != 1 {
                continue;
            }
            if let Some(targets) = by_text_target.get(n.text.as_str()) {
                if targets.len() == 1 {
                    record(
                        &mut matched_source,
                        &mut taken_target,
                        i as u32,
                        targets[0],
                        AlignPass::ExactText,
                    );
                }
            }
        }
    }

    // Pass 2: identical key and identical text (keys are unique per
    // snapshot).
    {
        let mut by_key_target: HashMap<&str, u32> = HashMap::new();
        for (i, n) in target.nodes.iter().enumerate() {
            by_key_target.insert(&n.key, i as u32);
        }
        for (i, n) in source.nodes.iter().enumerate() {
            if matched_source[i].is_some() {
                continue;
            }
            if let Some(&w) = by_key_target.get(n.key.as_str()) {
                if !taken_target[w as usize] && target.nodes[w as usize].text == n.text {
                    record(
                        &mut matched_source,
                        &mut taken_target,
                        i as u32,
                        w,
                        AlignPass::KeyAndText,
                    );
                }
            }
        }
    }

    // Pass 3: containment with minority remainder, unique among the
    // currently unmatched targets; candidates are evaluated live, in
    // document order.
    {
        for v in 0..ns {
            if matched_source[v].is_some() {
                continue;
            }
            let tv = &source.nodes[v].text;
            let lv = char_len(tv);
            let mut candidate: Option<u32> = None;
            let mut ambiguous = false;
            for w in 0..nt {
                if taken_target[w] {
                    continue;
                }
                let tw = &target.nodes[w].text;
                let lw = char_len(tw);
                let (longer, shorter, llen, slen) = if lv >= lw {
                    (tv, tw, lv, lw)
                } else {
                    (tw, tv, lw, lv)
                };
                if slen == 0 || llen - slen >= slen {
                    continue;
                }
                if longer.contains(shorter.as_str()) {
                    if candidate.is_some() {
                        ambiguous = true;
                        break;
                    }
                    candidate = Some(w as u32);
                }
            }
            if let (Some(w), false) = (candidate, ambiguous) {
                record(
                    &mut matched_source,
                    &mut taken_target,
                    v as u32,
                    w,
                    AlignPass::Containment,
                );
            }
        }
    }

    // Pass 4: five-hop neighbourhood similarity, repeated until a sweep
    // adds nothing.
    {
        let adj_s = adjacency(source);
        let adj_t = adjacency(target);
        loop {
            let mut added = false;
            for v in 0..ns {
                if matched_source[v].is_some() {
                    continue;
                }
                // Matched neighbours of v within five hops, and the
                // unmatched targets within five hops of their images.
                let mut candidates: Vec<u32> = Vec::new();
                for u in within_hops(&adj_s, v as u32, PASS4_HOPS) {
                    if let Some(pair) = matched_source[u as usize] {
                        for w in within_hops(&adj_t, pair.target, PASS4_HOPS) {
                            if !taken_target[w as usize] {
                                candidates.push(w);
                            }
                        }
                    }
                }
                candidates.sort_unstable();
                candidates.dedup();
                let tv = &source.nodes[v].text;
                let mut best: Option<(f64, u32)> = None;
                for w in candidates {
                    let sim = jaro_winkler(tv, &target.nodes[w as usize].text);
                    match best {
                        None => best = Some((sim, w)),
                        Some((bs, bw)) => {
                            if sim > bs || (sim == bs && w < bw) {
                                best = Some((sim, w));
                            }
                        }
                    }
                }
                if let Some((sim, w)) = best {
                    if sim > PASS4_THRESHOLD {
                        record(
                            &mut matched_source,
                            &mut taken_target,
                            v as u32,
                            w,
                            AlignPass::NeighborhoodSimilarity,
                        );
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
    }

    let matches: Vec<AlignedPair> = matched_source.iter().flatten().copied().collect();
    let unmatched_source = (0..ns as u32)
        .filter(|&v| matched_source[v as usize].is_none())
        .collect();
    let unmatched_target = (0..nt as u32).filter(|&w| !taken_target[w as usize]).collect();
    NodeAlignment {
        matches,
        unmatched_source,
        unmatched_target,
    }
}

/// Everything the cluster graph needs to know about one year.
#[derive(Debug, Clone)]
pub struct YearContext {
    pub snapshot_id: String,
    /// Cluster id of each subsequence-graph node (via its covering
    /// clustered node).
    pub cluster_of_unit: Vec<u32>,
    /// Token count of each subsequence-graph node.
    pub unit_tokens: Vec<u64>,
    /// |c| per cluster id: token count over the clustered nodes.
    pub cluster_tokens: Vec<u64>,
}

/// Builds the per-year context linking subsequence units to the clusters
/// of the merged sequence graph they belong to.
pub fn year_context(
    subseq: &SubsequenceGraph,
    merged: &SequenceGraph,
    clustering: &Clustering,
    hierarchy: &HierarchyGraph,
    snapshot_id: &str,
) -> Result<YearContext, DynamicsError> {
    if merged.nodes.len() != clustering.assignments.len() {
        return Err(DynamicsError::Integrity(format!(
            "clustering covers {} nodes but the merged graph has {}",
            clustering.assignments.len(),
            merged.nodes.len()
        )));
    }
    let mut seq_to_merged: HashMap<u32, u32> = HashMap::new();
    for (mi, node) in merged.nodes.iter().enumerate() {
        for &member in &node.members {
            seq_to_merged.insert(member, mi as u32);
        }
    }
    let mut cluster_of_unit = Vec::with_capacity(subseq.nodes.len());
    for node in &subseq.nodes {
        let unit = node.members[0];
        let seq = hierarchy.covering_seqitem(unit).ok_or_else(|| {
            DynamicsError::Integrity(format!("unit {} has no covering seqitem", node.id))
        })?;
        let merged_idx = seq_to_merged.get(&seq).ok_or_else(|| {
            DynamicsError::Integrity(format!(
                "seqitem {} missing from the merged graph",
                hierarchy.node(seq).element_id
            ))
        })?;
        cluster_of_unit.push(clustering.assignments[*merged_idx as usize]);
    }
    let cluster_count = clustering.cluster_count();
    let mut cluster_tokens = vec![0u64; cluster_count];
    for (mi, node) in merged.nodes.iter().enumerate() {
        cluster_tokens[clustering.assignments[mi] as usize] += node.tokens;
    }
    Ok(YearContext {
        snapshot_id: snapshot_id.to_string(),
        cluster_of_unit,
        unit_tokens: subseq.nodes.iter().map(|n| n.tokens).collect(),
        cluster_tokens,
    })
}

/// One cluster of one year, as a cluster-graph node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub snapshot_id: String,
    pub year_index: usize,
    pub cluster: u32,
    pub tokens: u64,
}

/// Token flow between clusters of adjacent snapshots.
#[derive(Debug, Clone)]
pub struct ClusterGraph {
    pub nodes: Vec<ClusterNode>,
    /// (source node, target node, tokens); arcs connect adjacent years
    /// only and carry positive weight.
    pub arcs: Vec<(u32, u32, u64)>,
    index: HashMap<(usize, u32), u32>,
}

impl ClusterGraph {
    /// Builds a cluster graph from explicit parts (used by exporters and
    /// fixtures); arcs must reference valid node indices.
    pub fn from_parts(nodes: Vec<ClusterNode>, arcs: Vec<(u32, u32, u64)>) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| ((n.year_index, n.cluster), i as u32))
            .collect();
        ClusterGraph { nodes, arcs, index }
    }

    pub fn node_index(&self, year_index: usize, cluster: u32) -> Option<u32> {
        self.index.get(&(year_index, cluster)).copied()
    }
}

/// Assembles the cluster graph from per-year clusterings and adjacent
/// alignments. Arc weight is the number of tokens of the aligned images
/// landing in the target cluster; zero-weight arcs are omitted.
pub fn build_cluster_graph(
    years: &[YearContext],
    alignments: &[NodeAlignment],
) -> Result<ClusterGraph, DynamicsError> {
    if !years.is_empty() && alignments.len() + 1 != years.len() {
        return Err(DynamicsError::Integrity(format!(
            "{} alignments do not chain {} years",
            alignments.len(),
            years.len()
        )));
    }
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    for (yi, y) in years.iter().enumerate() {
        for (c, &tokens) in y.cluster_tokens.iter().enumerate() {
            let idx = nodes.len() as u32;
            nodes.push(ClusterNode {
                snapshot_id: y.snapshot_id.clone(),
                year_index: yi,
                cluster: c as u32,
                tokens,
            });
            index.insert((yi, c as u32), idx);
        }
    }
    let mut weights: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (t, alignment) in alignments.iter().enumerate() {
        let (from, to) = (&years[t], &years[t + 1]);
        for pair in &alignment.matches {
            let v = pair.source as usize;
            let w = pair.target as usize;
            if v >= from.cluster_of_unit.len() || w >= to.cluster_of_unit.len() {
                return Err(DynamicsError::Integrity(format!(
                    "alignment references unknown node ({v} → {w})"
                )));
            }
            let c = index[&(t, from.cluster_of_unit[v])];
            let c2 = index[&(t + 1, to.cluster_of_unit[w])];
            *weights.entry((c, c2)).or_insert(0) += to.unit_tokens[w];
        }
    }
    let arcs = weights
        .into_iter()
        .filter(|&(_, w)| w > 0)
        .map(|((a, b), w)| (a, b, w))
        .collect();
    Ok(ClusterGraph { nodes, arcs, index })
}

/// The χ criterion of an arc: the flow's share of both endpoint clusters.
pub fn chi(source_tokens: u64, target_tokens: u64, flow: u64) -> f64 {
    let a = flow as f64 / source_tokens as f64;
    let b = flow as f64 / target_tokens as f64;
    a.min(b)
}

/// Cluster graph restricted to arcs with χ ≥ γ.
#[derive(Debug, Clone)]
pub struct FamilyGraph {
    pub nodes: Vec<ClusterNode>,
    pub arcs: Vec<(u32, u32, u64)>,
    pub gamma: f64,
}

/// Filters the cluster graph by the γ threshold. Every cluster must be
/// non-empty in tokens.
pub fn build_family_graph(cg: &ClusterGraph, gamma: f64) -> Result<FamilyGraph, DynamicsError> {
    for n in &cg.nodes {
        if n.tokens == 0 {
            return Err(DynamicsError::Integrity(format!(
                "cluster {}-{} is empty",
                n.snapshot_id, n.cluster
            )));
        }
    }
    let arcs = cg
        .arcs
        .iter()
        .copied()
        .filter(|&(s, t, w)| {
            chi(cg.nodes[s as usize].tokens, cg.nodes[t as usize].tokens, w) >= gamma
        })
        .collect();
    Ok(FamilyGraph {
        nodes: cg.nodes.clone(),
        arcs,
        gamma,
    })
}

/// A connected component of the family graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterFamily {
    /// Rank by leading-cluster tokens (0 = largest).
    pub index: usize,
    /// Cluster-graph node indices, sorted by (year, cluster).
    pub members: Vec<u32>,
    /// The largest member in tokens.
    pub leading: u32,
}

/// Connected components of the (undirected view of the) family graph,
/// ordered by leading-cluster token count descending; ties break on
/// earliest year, then lowest cluster id.
pub fn cluster_families(fg: &FamilyGraph) -> Vec<ClusterFamily> {
    let n = fg.nodes.len();
    let mut uf = UnionFind::new(n);
    for &(s, t, _) in &fg.arcs {
        uf.union(s as usize, t as usize);
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(uf.find(v)).or_default().push(v as u32);
    }
    let mut families: Vec<ClusterFamily> = groups
        .into_values()
        .map(|mut members| {
            members.sort_by_key(|&m| {
                (
                    fg.nodes[m as usize].year_index,
                    fg.nodes[m as usize].cluster,
                )
            });
            let leading = members
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    let na = &fg.nodes[a as usize];
                    let nb = &fg.nodes[b as usize];
                    na.tokens
                        .cmp(&nb.tokens)
                        .then(nb.year_index.cmp(&na.year_index))
                        .then(nb.cluster.cmp(&na.cluster))
                })
                .expect("non-empty component");
            ClusterFamily {
                index: 0,
                members,
                leading,
            }
        })
        .collect();
    families.sort_by(|a, b| {
        let la = &fg.nodes[a.leading as usize];
        let lb = &fg.nodes[b.leading as usize];
        lb.tokens
            .cmp(&la.tokens)
            .then(la.year_index.cmp(&lb.year_index))
            .then(la.cluster.cmp(&lb.cluster))
    });
    for (i, f) in families.iter_mut().enumerate() {
        f.index = i;
    }
    families
}

/// Per-year family size: Σ tokens of members in that year; years without
/// members report 0.
pub fn family_size_series(
    family: &ClusterFamily,
    fg: &FamilyGraph,
    year_count: usize,
) -> Vec<u64> {
    let mut sizes = vec![0u64; year_count];
    for &m in &family.members {
        let node = &fg.nodes[m as usize];
        sizes[node.year_index] += node.tokens;
    }
    sizes
}
