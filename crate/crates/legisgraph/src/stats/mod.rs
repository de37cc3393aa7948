//! Growth accounting, OLS regression with Wald p-values, clustering
//! comparison metrics (NMI/ARI), TF-IDF summaries, and the sensitivity
//! and robustness harnesses.

mod special;

pub use special::{betai, ln_gamma, student_t_cdf, wald_two_sided_p};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{consensus, Clustering, ConsensusParams, FlowGraph};
use crate::corpus::SnapshotStats;
use crate::graphs::{GraphError, HierarchyGraph, ReferenceGraph};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("partitions must cover the same universe: {0}")]
    UniverseMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cluster(#[from] crate::cluster::ClusterError),
}

/// Per-year corpus statistics, absolute and relative to the first year.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub years: Vec<String>,
    pub absolute: Vec<SnapshotStats>,
    /// value / first-year value, so the first year reads 1.0.
    pub relative_tokens: Vec<f64>,
    pub relative_structures: Vec<f64>,
    pub relative_references: Vec<f64>,
}

/// Builds the growth series from per-snapshot counts.
pub fn growth_series(stats: &[(String, SnapshotStats)]) -> GrowthSeries {
    let rel = |v: u64, base: u64| -> f64 {
        if base == 0 {
            if v == 0 {
                1.0
            } else {
                f64::NAN
            }
        } else {
            v as f64 / base as f64
        }
    };
    let base = stats.first().map(|(_, s)| *s);
    let mut out = GrowthSeries {
        years: Vec::new(),
        absolute: Vec::new(),
        relative_tokens: Vec::new(),
        relative_structures: Vec::new(),
        relative_references: Vec::new(),
    };
    for (year, s) in stats {
        let b = base.expect("non-empty once iterating");
        out.years.push(year.clone());
        out.absolute.push(*s);
        out.relative_tokens.push(rel(s.tokens, b.tokens));
        out.relative_structures.push(rel(s.structures, b.structures));
        out.relative_references.push(rel(s.references, b.references));
    }
    out
}

/// Counts per organizational unit (e.g. Title): tokens, structures, and
/// references leaving, entering, and staying inside the unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitStats {
    pub tokens: u64,
    pub structures: u64,
    pub out_refs: u64,
    pub in_refs: u64,
    pub internal_refs: u64,
}

/// Classifies every node and cross-reference by unit. The selector must
/// be total on nodes (the meta root may map to its own unit).
pub fn per_unit_breakdown(
    refgraph: &ReferenceGraph,
    unit_selector: &dyn Fn(&HierarchyGraph, u32) -> Option<String>,
) -> Result<BTreeMap<String, UnitStats>, StatsError> {
    let h = &refgraph.hierarchy;
    let mut unit_of: Vec<String> = Vec::with_capacity(h.node_count());
    let mut table: BTreeMap<String, UnitStats> = BTreeMap::new();
    for i in 0..h.node_count() as u32 {
        let unit = unit_selector(h, i).ok_or_else(|| {
            GraphError::Mapping(format!(
                "unit selector undefined for {}",
                h.node(i).element_id
            ))
        })?;
        let entry = table.entry(unit.clone()).or_default();
        entry.structures += 1;
        if !h.node(i).in_appendix {
            entry.tokens += h.node(i).tokens;
        }
        unit_of.push(unit);
    }
    for &(s, t) in &refgraph.cross_refs {
        let us = &unit_of[s as usize];
        let ut = &unit_of[t as usize];
        if us == ut {
            table.get_mut(us).expect("unit exists").internal_refs += 1;
        } else {
            table.get_mut(us).expect("unit exists").out_refs += 1;
            table.get_mut(ut).expect("unit exists").in_refs += 1;
        }
    }
    Ok(table)
}

/// Selector grouping every node under its document root (the meta root
/// forms its own unit).
pub fn document_unit_selector(h: &HierarchyGraph, i: u32) -> Option<String> {
    if h.node(i).level < 0 {
        return Some(h.node(i).element_id.clone());
    }
    Some(h.node(h.document_root(i)).element_id.clone())
}

/// Simple OLS fit of y on x with the Wald test on the slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub std_err: f64,
    pub t_stat: f64,
    /// Two-sided p-value; `None` when n < 3 (no residual degrees of
    /// freedom).
    pub p_value: Option<f64>,
    pub n: usize,
    /// Zero residual variance: the fit is exact and the p-value is
    /// reported as exactly 0.
    pub degenerate: bool,
}

/// Closed-form simple OLS; the p-value comes from the t CDF with n−2
/// degrees of freedom via the regularized incomplete beta.
pub fn ols_slope(series: &[(f64, f64)]) -> Result<RegressionResult, StatsError> {
    let n = series.len();
    if n < 2 {
        return Err(StatsError::Parameter(format!(
            "need at least two points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = series.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let mean_y = series.iter().map(|(_, y)| y).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in series {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(StatsError::Parameter(
            "zero variance in x".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ssr = 0.0;
    for &(x, y) in series {
        let r = y - (intercept + slope * x);
        ssr += r * r;
    }
    if n < 3 {
        return Ok(RegressionResult {
            slope,
            intercept,
            std_err: f64::NAN,
            t_stat: f64::NAN,
            p_value: None,
            n,
            degenerate: ssr == 0.0,
        });
    }
    let dof = nf - 2.0;
    // An exact fit leaves the Wald statistic unbounded; report p = 0
    // with the degenerate flag.
    let rel_ssr = ssr / (1.0 + mean_y * mean_y * nf);
    if rel_ssr < 1e-24 {
        return Ok(RegressionResult {
            slope,
            intercept,
            std_err: 0.0,
            t_stat: f64::INFINITY,
            p_value: Some(0.0),
            n,
            degenerate: true,
        });
    }
    let s2 = ssr / dof;
    let std_err = (s2 / sxx).sqrt();
    let t_stat = slope / std_err;
    let p = wald_two_sided_p(t_stat, dof);
    Ok(RegressionResult {
        slope,
        intercept,
        std_err,
        t_stat,
        p_value: Some(p),
        n,
        degenerate: false,
    })
}

/// Two partitions over the same element universe plus their contingency
/// table.
#[derive(Debug, Clone)]
pub struct PartitionPair {
    labels_x: Vec<u32>,
    labels_y: Vec<u32>,
}

impl PartitionPair {
    pub fn new(labels_x: Vec<u32>, labels_y: Vec<u32>) -> Result<Self, StatsError> {
        if labels_x.len() != labels_y.len() {
            return Err(StatsError::UniverseMismatch(format!(
                "{} vs {} elements",
                labels_x.len(),
                labels_y.len()
            )));
        }
        Ok(PartitionPair { labels_x, labels_y })
    }

    pub fn from_clusterings(x: &Clustering, y: &Clustering) -> Result<Self, StatsError> {
        if x.node_ids != y.node_ids {
            return Err(StatsError::UniverseMismatch(
                "clusterings cover different node sets".to_string(),
            ));
        }
        PartitionPair::new(x.assignments.clone(), y.assignments.clone())
    }

    pub fn len(&self) -> usize {
        self.labels_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels_x.is_empty()
    }

    /// Contingency counts: cells, row marginals (X), column marginals (Y).
    pub fn contingency(
        &self,
    ) -> (
        BTreeMap<(u32, u32), u64>,
        BTreeMap<u32, u64>,
        BTreeMap<u32, u64>,
    ) {
        let mut cells = BTreeMap::new();
        let mut rows = BTreeMap::new();
        let mut cols = BTreeMap::new();
        for (&x, &y) in self.labels_x.iter().zip(&self.labels_y) {
            *cells.entry((x, y)).or_insert(0u64) += 1;
            *rows.entry(x).or_insert(0u64) += 1;
            *cols.entry(y).or_insert(0u64) += 1;
        }
        (cells, rows, cols)
    }

    /// True when both labelings induce the same grouping (label names
    /// aside).
    pub fn identical_partitions(&self) -> bool {
        canonical(&self.labels_x) == canonical(&self.labels_y)
    }
}

fn canonical(labels: &[u32]) -> Vec<u32> {
    let mut remap = BTreeMap::new();
    let mut next = 0u32;
    labels
        .iter()
        .map(|&l| {
            *remap.entry(l).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

/// Normalized mutual information `I(X;Y) / √(H(X)·H(Y))`, natural
/// logarithms throughout (the ratio is base-invariant). Degenerate
/// entropies: identical partitions give 1, otherwise 0.
pub fn nmi(pair: &PartitionPair) -> f64 {
    if pair.is_empty() || pair.identical_partitions() {
        return 1.0;
    }
    let n = pair.len() as f64;
    let (cells, rows, cols) = pair.contingency();
    let h = |marginals: &BTreeMap<u32, u64>| -> f64 {
        marginals
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hx = h(&rows);
    let hy = h(&cols);
    if hx == 0.0 || hy == 0.0 {
        return 0.0;
    }
    // Integer products inside the logarithm keep independent tables at
    // exactly I = 0.
    let mut mi = 0.0;
    for (&(x, y), &c) in &cells {
        let ratio = (pair.len() as u128 * c as u128) as f64 / (rows[&x] as u128 * cols[&y] as u128) as f64;
        mi += (c as f64 / n) * ratio.ln();
    }
    (mi / (hx * hy).sqrt()).clamp(0.0, 1.0)
}

/// Adjusted Rand index with the hypergeometric chance correction,
/// computed in integer arithmetic with one final division so reference
/// cases (such as −0.5) come out exact. Identical partitions return 1.
pub fn ari(pair: &PartitionPair) -> f64 {
    if pair.identical_partitions() {
        return 1.0;
    }
    let comb2 = |v: u64| -> i128 {
        let v = v as i128;
        v * (v - 1) / 2
    };
    let (cells, rows, cols) = pair.contingency();
    let sum_cells: i128 = cells.values().map(|&c| comb2(c)).sum();
    let sum_rows: i128 = rows.values().map(|&c| comb2(c)).sum();
    let sum_cols: i128 = cols.values().map(|&c| comb2(c)).sum();
    let total = comb2(pair.len() as u64);
    // ARI = (Σc − ΣaΣb/C) / ((Σa+Σb)/2 − ΣaΣb/C), scaled by 2C.
    let num = 2 * (total * sum_cells - sum_rows * sum_cols);
    let den = total * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
    if den == 0 {
        return 1.0;
    }
    num as f64 / den as f64
}

/// Ranked TF-IDF terms per family: tf is the raw count inside the
/// family's concatenated text, idf = ln(N / df) over the N families, and
/// excluded structural nouns never rank. Ties break lexicographically.
pub fn tfidf_top_terms(
    family_texts: &[String],
    k: usize,
    exclusions: &BTreeSet<String>,
) -> Vec<Vec<(String, f64)>> {
    let n = family_texts.len();
    let term_counts: Vec<BTreeMap<String, u64>> = family_texts
        .iter()
        .map(|text| {
            let mut counts = BTreeMap::new();
            for raw in text.split_whitespace() {
                let term = raw
                    .trim_matches(|c: char| !c.is_alphanumeric())
                    .to_lowercase();
                if term.is_empty() || exclusions.contains(&term) {
                    continue;
                }
                *counts.entry(term).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for counts in &term_counts {
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    term_counts
        .iter()
        .map(|counts| {
            let mut scored: Vec<(String, f64)> = counts
                .iter()
                .map(|(term, &tf)| {
                    let idf = (n as f64 / df[term.as_str()] as f64).ln();
                    (term.clone(), tf as f64 * idf)
                })
                .filter(|(_, score)| *score > 0.0)
                .collect();
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
            scored.truncate(k);
            scored
        })
        .collect()
}

/// Default exclusion list: nouns naming structural elements of legal
/// texts.
pub fn default_tfidf_exclusions() -> BTreeSet<String> {
    [
        "title", "titles", "section", "sections", "subsection", "subsections", "paragraph",
        "paragraphs", "subparagraph", "subparagraphs", "chapter", "chapters", "subchapter",
        "subchapters", "clause", "clauses", "part", "parts", "article", "articles", "absatz",
        "satz", "nummer", "buch", "abschnitt", "artikel",
    ]
    .into_iter()
    .map(str::to_string)
    .collect()
}

/// One sensitivity setting: consensus under a preferred module count,
/// compared against the baseline consensus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityPoint {
    /// `None` means the optimizer chooses freely ("auto").
    pub preferred_n: Option<u32>,
    pub nmi: f64,
    pub ari: f64,
}

/// The preferred-count settings of the sensitivity harness: multiples of
/// 10 from 10 to 150, then 200, then auto.
pub fn default_preferred_list() -> Vec<Option<u32>> {
    let mut list: Vec<Option<u32>> = (1..=15).map(|k| Some(k * 10)).collect();
    list.push(Some(200));
    list.push(None);
    list
}

/// Runs consensus per setting and reports NMI/ARI against the baseline
/// setting (all with identical seeds).
pub fn sensitivity_sweep(
    flow: &FlowGraph,
    preferred_list: &[Option<u32>],
    baseline: u32,
    base_params: ConsensusParams,
) -> Result<Vec<SensitivityPoint>, StatsError> {
    let baseline_params = ConsensusParams {
        preferred_n: Some(baseline),
        ..base_params
    };
    let baseline_clustering = consensus(flow, baseline_params)?.clustering;
    let points: Result<Vec<SensitivityPoint>, StatsError> = preferred_list
        .par_iter()
        .map(|&preferred_n| {
            let params = ConsensusParams {
                preferred_n,
                ..base_params
            };
            let clustering = consensus(flow, params)?.clustering;
            let pair = PartitionPair::from_clusterings(&clustering, &baseline_clustering)?;
            Ok(SensitivityPoint {
                preferred_n,
                nmi: nmi(&pair),
                ari: ari(&pair),
            })
        })
        .collect();
    points
}

/// Pairwise similarities between repeated consensus results at one
/// consensus size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessPoint {
    pub consensus_size: u32,
    pub nmi: Vec<f64>,
    pub ari: Vec<f64>,
}

impl RobustnessPoint {
    pub fn median_nmi(&self) -> f64 {
        median(&self.nmi)
    }

    pub fn median_ari(&self) -> f64 {
        median(&self.ari)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Repeats consensus `repeats` times per consensus size with disjoint
/// seed ranges and reports all pairwise NMI/ARI values.
pub fn robustness_sweep(
    flow: &FlowGraph,
    consensus_sizes: &[u32],
    repeats: u32,
    base_params: ConsensusParams,
) -> Result<Vec<RobustnessPoint>, StatsError> {
    let mut out = Vec::with_capacity(consensus_sizes.len());
    for &size in consensus_sizes {
        let clusterings: Result<Vec<Clustering>, StatsError> = (0..repeats)
            .into_par_iter()
            .map(|rep| {
                let params = ConsensusParams {
                    runs: size,
                    seed_base: base_params.seed_base + (rep as u64) * (size as u64),
                    ..base_params
                };
                Ok(consensus(flow, params)?.clustering)
            })
            .collect();
        let clusterings = clusterings?;
        let mut nmis = Vec::new();
        let mut aris = Vec::new();
        for i in 0..clusterings.len() {
            for j in (i + 1)..clusterings.len() {
                let pair = PartitionPair::from_clusterings(&clusterings[i], &clusterings[j])?;
                nmis.push(nmi(&pair));
                aris.push(ari(&pair));
            }
        }
        out.push(RobustnessPoint {
            consensus_size: size,
            nmi: nmis,
            ari: aris,
        });
    }
    Ok(out)
}
