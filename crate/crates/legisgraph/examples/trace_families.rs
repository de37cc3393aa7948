//! Trace token flow across the mini corpus: cluster graph, family graph,
//! cluster families, and per-year family sizes.
//!
//! ```bash
//! cargo run --example trace_families
//! ```

use std::path::Path;

use legisgraph::cluster::{consensus, visit_rates, ConsensusParams, WeightedDigraph};
use legisgraph::corpus::load_series;
use legisgraph::dynamics::{
    align_nodes, build_cluster_graph, build_family_graph, cluster_families, family_size_series,
    year_context,
};
use legisgraph::graphs::{
    build_hierarchy, build_reference, build_sequence, build_subsequence, MergeRule, SequenceParams,
};
use legisgraph::refextract::{extract_all, CitationProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let manifests: Vec<_> = ["1994", "1995", "1996"]
        .iter()
        .map(|y| mini.join(format!("{y}.manifest.json")))
        .collect();
    let snapshots = load_series(&manifests)?;
    let profile = CitationProfile::builtin("us")?;
    let merge_params = SequenceParams {
        rho: MergeRule::ChapterOrTitle,
        ..SequenceParams::default()
    };

    let mut contexts = Vec::new();
    let mut subseqs = Vec::new();
    for snapshot in &snapshots {
        let outcome = extract_all(snapshot, &profile);
        let h = build_hierarchy(snapshot);
        let r = build_reference(h, &outcome.references)?;
        let merged = build_sequence(&r, snapshot, merge_params.clone())?;
        let subseq = build_subsequence(&r, snapshot, SequenceParams::default())?;
        let digraph = WeightedDigraph::from_sequence_graph(&merged, false);
        let flow = visit_rates(&digraph, 0.15)?;
        let mut clustering = consensus(
            &flow,
            ConsensusParams {
                runs: 100,
                threshold: 0.95,
                preferred_n: Some(2),
                lambda: 1.0,
                seed_base: 7,
            },
        )?
        .clustering;
        let label = snapshot.date.format("%Y").to_string();
        clustering.snapshot_id = label.clone();
        contexts.push(year_context(&subseq, &merged, &clustering, &r.hierarchy, &label)?);
        subseqs.push(subseq);
    }
    let alignments: Vec<_> = subseqs
        .windows(2)
        .map(|pair| align_nodes(&pair[0], &pair[1]))
        .collect();

    let cg = build_cluster_graph(&contexts, &alignments)?;
    println!("cluster graph: {} clusters, {} flows", cg.nodes.len(), cg.arcs.len());
    for &(s, t, w) in &cg.arcs {
        let a = &cg.nodes[s as usize];
        let b = &cg.nodes[t as usize];
        println!(
            "  {}-{} ({} tokens) → {}-{} ({} tokens): {w} tokens move",
            a.snapshot_id, a.cluster, a.tokens, b.snapshot_id, b.cluster, b.tokens
        );
    }

    let fg = build_family_graph(&cg, 0.15)?;
    println!("family graph keeps {} of {} flows at γ = 0.15", fg.arcs.len(), cg.arcs.len());

    let families = cluster_families(&fg);
    for family in &families {
        let lead = &fg.nodes[family.leading as usize];
        println!(
            "family {}: {} member clusters, leading {}-{} ({} tokens)",
            family.index,
            family.members.len(),
            lead.snapshot_id,
            lead.cluster,
            lead.tokens
        );
        let sizes = family_size_series(family, &fg, contexts.len());
        for (ctx, size) in contexts.iter().zip(sizes) {
            println!("    {}: {size} tokens", ctx.snapshot_id);
        }
    }
    Ok(())
}
