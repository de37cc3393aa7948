//! Property tests for the spec-level invariants.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use common::*;
use legisgraph::cluster::{codelength, visit_rates, Clustering};
use legisgraph::corpus::synthetic::{generate, SyntheticSpec};
use legisgraph::corpus::{
    compare_citekeys, count_tokens, parse_document, serialize_document, ElementKind, Snapshot,
    TreeBuilder,
};
use legisgraph::dynamics::{align_nodes, chi, jaro_winkler};
use legisgraph::graphs::{
    build_hierarchy, build_reference, build_sequence, build_subsequence, quotient, ArcSet,
    SequenceParams,
};
use legisgraph::refextract::{extract_all, find_references, CitationProfile};
use legisgraph::stats::{ari, nmi, ols_slope, PartitionPair};
use proptest::prelude::*;

fn text_strategy() -> impl Strategy<Value = String> {
    // Printable text with at least one non-whitespace character
    // (whitespace-only content is canonically empty).
    proptest::string::string_regex("[ -~äöü§]{0,40}[a-zA-Z0-9&<>\"']").unwrap()
}

fn tree_strategy() -> impl Strategy<Value = legisgraph::corpus::DocumentTree> {
    let sub = proptest::collection::vec(text_strategy(), 0..3);
    let seq = (text_strategy(), sub);
    let item = proptest::collection::vec(seq, 1..4);
    proptest::collection::vec(item, 1..3).prop_map(|items| {
        let mut b = TreeBuilder::new(
            Some("T".into()),
            Some("Title T".into()),
            "2000-01-01".into(),
            "T",
        );
        let mut key = 0;
        for chapters in items {
            b.open(ElementKind::Item, Some("Chapter".into()), None, false)
                .unwrap();
            for (text, subs) in chapters {
                key += 1;
                b.open(ElementKind::Seqitem, None, Some(format!("T/{key}")), false)
                    .unwrap();
                if subs.is_empty() {
                    b.text(&text).unwrap();
                } else {
                    for s in subs {
                        b.open(ElementKind::Subseqitem, None, None, false).unwrap();
                        b.text(&s).unwrap();
                        b.close();
                    }
                }
                b.close();
            }
            b.close();
        }
        b.finish().unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serialize → parse is the identity on trees.
    #[test]
    fn xml_round_trip(tree in tree_strategy()) {
        let xml = serialize_document(&tree);
        let again = parse_document(xml.as_bytes()).unwrap();
        prop_assert_eq!(tree, again);
    }

    /// Token counting is invariant under whitespace normalization.
    #[test]
    fn tokens_invariant_under_ws_normalization(raw in "[ \\ta-z0-9\\n§.,]{0,120}") {
        let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        prop_assert_eq!(count_tokens(&raw), count_tokens(&collapsed));
    }

    /// Jaro-Winkler is symmetric and bounded.
    #[test]
    fn jw_symmetric_bounded(a in "[a-zA-Z0-9 ]{0,24}", b in "[a-zA-Z0-9 ]{0,24}") {
        let ab = jaro_winkler(&a, &b);
        let ba = jaro_winkler(&b, &a);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(jaro_winkler(&a, &a), 1.0);
    }

    /// NMI and ARI are symmetric; self-comparison gives exactly 1; ARI is
    /// invariant under label permutation.
    #[test]
    fn partition_metric_invariants(
        labels in proptest::collection::vec(0u32..5, 2..24),
        other in proptest::collection::vec(0u32..5, 2..24),
        perm_seed in 0u64..1000,
    ) {
        let n = labels.len().min(other.len());
        let x = labels[..n].to_vec();
        let y = other[..n].to_vec();
        let p = PartitionPair::new(x.clone(), y.clone()).unwrap();
        let q = PartitionPair::new(y.clone(), x.clone()).unwrap();
        prop_assert!((nmi(&p) - nmi(&q)).abs() < 1e-12);
        prop_assert!((ari(&p) - ari(&q)).abs() < 1e-12);
        let with_self = PartitionPair::new(x.clone(), x.clone()).unwrap();
        prop_assert_eq!(nmi(&with_self), 1.0);
        prop_assert_eq!(ari(&with_self), 1.0);
        // Relabeling invariance.
        let shift = (perm_seed % 5) as u32;
        let relabeled: Vec<u32> = y.iter().map(|&l| (l + shift) % 5 + 10).collect();
        let r = PartitionPair::new(x.clone(), relabeled).unwrap();
        let base = PartitionPair::new(x, y).unwrap();
        prop_assert!((ari(&r) - ari(&base)).abs() < 1e-12);
        prop_assert!((nmi(&r) - nmi(&base)).abs() < 1e-12);
    }

    /// OLS residuals are orthogonal to the design: Σr = 0 and Σr·x = 0.
    #[test]
    fn ols_residual_orthogonality(ys in proptest::collection::vec(-100.0f64..100.0, 3..30)) {
        let series: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let r = ols_slope(&series).unwrap();
        let mut sum_r = 0.0;
        let mut sum_rx = 0.0;
        for &(x, y) in &series {
            let resid = y - (r.intercept + r.slope * x);
            sum_r += resid;
            sum_rx += resid * x;
        }
        let scale = 1.0 + ys.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(sum_r.abs() <= 1e-9 * scale * series.len() as f64, "Σr = {sum_r}");
        prop_assert!(sum_rx.abs() <= 1e-9 * scale * series.len() as f64 * series.len() as f64, "Σrx = {sum_rx}");
    }

    /// χ-based retention does not depend on which endpoint is larger.
    #[test]
    fn chi_swap_invariance(a in 1u64..10_000, b in 1u64..10_000, w in 0u64..10_000) {
        prop_assert_eq!(chi(a, b, w) >= 0.15, chi(b, a, w) >= 0.15);
    }

    /// Codelength is non-negative and bit-stable for any partition.
    #[test]
    fn codelength_nonnegative(assignment in proptest::collection::vec(0u32..4, 8)) {
        let flow = visit_rates(&barbell(), 0.15).unwrap();
        let c = Clustering {
            snapshot_id: String::new(),
            node_ids: flow.node_ids.clone(),
            assignments: assignment,
            seed: 0,
        }.canonicalized();
        let l1 = codelength(&flow, &c);
        let l2 = codelength(&flow, &c);
        prop_assert!(l1 >= 0.0);
        prop_assert_eq!(l1.to_bits(), l2.to_bits());
    }

    /// Planting k syntactically valid citations into citation-free filler
    /// yields exactly k spans, all within bounds and non-overlapping.
    #[test]
    fn citation_injection(
        filler in proptest::collection::vec("[a-z]{2,8}", 4..40),
        positions in proptest::collection::vec(0usize..1000, 0..5),
        sections in proptest::collection::vec(1u32..9999, 5),
    ) {
        let profile = CitationProfile::builtin("us").unwrap();
        let mut words = filler;
        // Distinct section numbers, inserted at distinct word gaps.
        let mut nums: Vec<u32> = sections;
        nums.sort_unstable();
        nums.dedup();
        let mut gaps: Vec<usize> = positions.iter().map(|p| p % (words.len() - 1) + 1).collect();
        gaps.sort_unstable();
        gaps.dedup();
        let k = gaps.len().min(nums.len());
        for (i, &gap) in gaps.iter().take(k).enumerate().rev() {
            words.insert(gap, format!("section {} of this title,", nums[i]));
        }
        let text = words.join(" ");
        let element = legisgraph::corpus::StructuralElement {
            id: "e".into(),
            kind: ElementKind::Seqitem,
            level: 1,
            heading: None,
            cite_key: None,
            abbreviation: None,
            text: text.clone(),
            appendix: false,
        };
        let spans = find_references(&element, &profile);
        prop_assert_eq!(spans.len(), k, "text: {}", text);
        let mut last_end = 0;
        for s in &spans {
            prop_assert!(s.char_range.start >= last_end);
            prop_assert!(s.char_range.end <= text.len());
            prop_assert_eq!(&text[s.char_range.clone()], s.raw.as_str());
            last_end = s.char_range.end;
        }
    }

    /// Quotient conservation: Σ arc multiplicities equals the number of
    /// source arcs, for random reference structures and partitions.
    #[test]
    fn quotient_conserves_arcs(
        n in 2usize..12,
        arcs in proptest::collection::vec((0usize..12, 0usize..12), 0..40),
        labels in proptest::collection::vec(0u32..4, 12),
    ) {
        let mut b = TreeBuilder::new(Some("Q".into()), None, "2000-01-01".into(), "Q");
        for i in 0..n {
            b.open(ElementKind::Seqitem, None, Some(format!("Q/{i}")), false).unwrap();
            b.text("x").unwrap();
            b.close();
        }
        let snap = Snapshot::new("q", NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(), vec![b.finish().unwrap()]).unwrap();
        let h = build_hierarchy(&snap);
        let refs: Vec<legisgraph::refextract::ResolvedReference> = arcs
            .iter()
            .map(|&(s, t)| {
                let s = snap.resolve_citekey(&format!("Q/{}", s % n)).unwrap();
                let t = snap.resolve_citekey(&format!("Q/{}", t % n)).unwrap();
                legisgraph::refextract::ResolvedReference {
                    source_id: snap.element(s).id.clone(),
                    target_id: snap.element(t).id.clone(),
                    cite_key: String::new(),
                }
            })
            .collect();
        let g = build_reference(h, &refs).unwrap();
        let total = g.arc_count() as u64;
        let q = quotient(&g, &move |h, i| Some(format!("c{}", labels[(i as usize) % labels.len()])), ArcSet::All).unwrap();
        let sum: u64 = q.arcs.iter().map(|a| a.multiplicity).sum();
        prop_assert_eq!(sum, total);
        let member_sum: usize = q.classes.iter().map(|c| c.members.len()).sum();
        prop_assert_eq!(member_sum, g.hierarchy.node_count());
    }
}

/// Sequence arcs come in symmetric pairs and reference projection
/// conserves multiplicity, on generated corpora.
#[test]
fn sequence_symmetry_and_projection_conservation() {
    for seed in [3u64, 17, 99] {
        let spec = SyntheticSpec {
            years: 1,
            seed,
            ..SyntheticSpec::default()
        };
        let corpus = generate(&spec);
        let snap = &corpus.snapshots[0];
        let profile = CitationProfile::builtin("us").unwrap();
        let outcome = extract_all(snap, &profile);
        let h = build_hierarchy(snap);
        let r = build_reference(h, &outcome.references).unwrap();
        for rho in [
            legisgraph::graphs::MergeRule::None,
            legisgraph::graphs::MergeRule::ChapterOrTitle,
        ] {
            let params = SequenceParams {
                rho: rho.clone(),
                ..SequenceParams::default()
            };
            let g = build_sequence(&r, snap, params.clone()).unwrap();
            for arc in &g.sequence_arcs {
                assert!(
                    g.sequence_arcs.iter().any(|b| b.source == arc.target
                        && b.target == arc.source
                        && b.weight == arc.weight),
                    "missing symmetric pair"
                );
                assert!(arc.weight > 0.0);
            }
            assert_eq!(
                g.reference_arcs.len(),
                r.cross_refs.len(),
                "projection conservation under {rho:?}"
            );
            let sub = build_subsequence(&r, snap, params).unwrap();
            assert_eq!(sub.reference_arcs.len(), r.cross_refs.len());
        }
    }
}

/// Extraction output is deterministic and sound: every resolved target
/// exists in the cite-key index.
#[test]
fn extraction_deterministic_and_sound() {
    let spec = SyntheticSpec {
        years: 1,
        documents: 3,
        seed: 5,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&spec);
    let snap = &corpus.snapshots[0];
    let profile = CitationProfile::builtin("us").unwrap();
    let a = extract_all(snap, &profile);
    let b = extract_all(snap, &profile);
    assert_eq!(a.references, b.references);
    assert_eq!(a.report, b.report);
    assert!(!a.references.is_empty());
    for r in &a.references {
        let target = snap.resolve_citekey(&r.cite_key).expect("aligned key exists");
        assert_eq!(snap.element(target).id, r.target_id);
        assert_eq!(snap.element(target).kind, ElementKind::Seqitem);
    }
}

/// Snapshot structure count equals one (meta root) plus the sum of the
/// document tree sizes; cite keys in document order agree with the
/// configured comparator.
#[test]
fn structure_count_and_key_order() {
    let corpus = generate(&SyntheticSpec::default());
    for snap in &corpus.snapshots {
        let h = build_hierarchy(snap);
        let expected: usize = 1 + snap.documents.iter().map(|d| d.len()).sum::<usize>();
        assert_eq!(h.node_count(), expected);
        for doc in &snap.documents {
            let keys: Vec<&str> = doc
                .seqitem_indices()
                .into_iter()
                .map(|i| doc.node(i).cite_key.as_deref().unwrap())
                .collect();
            let mut sorted = keys.clone();
            sorted.sort_by(|a, b| compare_citekeys(a, b));
            assert_eq!(keys, sorted, "document order equals key order");
        }
    }
}

/// The alignment map is injective and never rematches a matched node.
#[test]
fn alignment_injective() {
    let spec = SyntheticSpec {
        years: 2,
        seed: 77,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&spec);
    let graphs: Vec<_> = corpus
        .snapshots
        .iter()
        .map(|s| {
            let h = build_hierarchy(s);
            let r = build_reference(h, &[]).unwrap();
            build_subsequence(&r, s, SequenceParams::default()).unwrap()
        })
        .collect();
    let alignment = align_nodes(&graphs[0], &graphs[1]);
    let mut sources = BTreeSet::new();
    let mut targets = BTreeSet::new();
    for pair in &alignment.matches {
        assert!(sources.insert(pair.source), "source matched twice");
        assert!(targets.insert(pair.target), "target matched twice");
    }
    // Unmatched lists are disjoint from the matches.
    for &v in &alignment.unmatched_source {
        assert!(!sources.contains(&v));
    }
    for &w in &alignment.unmatched_target {
        assert!(!targets.contains(&w));
    }
    // Identical snapshots align completely.
    let self_alignment = align_nodes(&graphs[0], &graphs[0]);
    assert!(self_alignment.unmatched_source.is_empty());
    assert!(self_alignment.unmatched_target.is_empty());
    let mapping: BTreeMap<u32, u32> = self_alignment.mapping();
    assert!(mapping.iter().all(|(a, b)| a == b));
}
