//! Build the four graph views of one snapshot and export them as GraphML.
//!
//! ```bash
//! cargo run --example build_graphs
//! ```

use std::path::Path;

use legisgraph::corpus::load_snapshot;
use legisgraph::graphs::{
    build_hierarchy, build_reference, build_sequence, build_subsequence, graphml,
    merge_rule_selector, quotient, ArcSet, MergeRule, SequenceParams,
};
use legisgraph::refextract::{extract_all, CitationProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let snapshot = load_snapshot(&mini.join("1994.manifest.json"))?;
    let outcome = extract_all(&snapshot, &CitationProfile::builtin("us")?);

    let hierarchy = build_hierarchy(&snapshot);
    println!(
        "hierarchy: {} nodes, {} containment arcs",
        hierarchy.node_count(),
        hierarchy.arc_count()
    );

    let refgraph = build_reference(hierarchy, &outcome.references)?;
    println!(
        "reference: {} arcs total ({} cross references)",
        refgraph.arc_count(),
        refgraph.cross_refs.len()
    );

    let merged = build_sequence(
        &refgraph,
        &snapshot,
        SequenceParams {
            rho: MergeRule::ChapterOrTitle,
            ..SequenceParams::default()
        },
    )?;
    println!(
        "sequence (chapter merge): {} nodes, {} sequence arcs, {} reference arcs",
        merged.nodes.len(),
        merged.sequence_arcs.len(),
        merged.reference_arcs.len()
    );
    for node in &merged.nodes {
        println!("  node {:<8} tokens {:>3} members {}", node.id, node.tokens, node.members.len());
    }

    let subseq = build_subsequence(&refgraph, &snapshot, SequenceParams::default())?;
    println!("subsequence (no merge): {} nodes", subseq.nodes.len());

    let selector = merge_rule_selector(MergeRule::ChapterOrTitle);
    let q = quotient(&refgraph, &selector, ArcSet::CrossReferencesOnly)?;
    println!("quotient: {} classes, {} arcs", q.classes.len(), q.arcs.len());
    for arc in &q.arcs {
        println!(
            "  {} → {} ×{}",
            q.classes[arc.source as usize].key,
            q.classes[arc.target as usize].key,
            arc.multiplicity
        );
    }

    let out = std::env::temp_dir().join("legisgraph-graphs");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("hierarchy.graphml"), graphml::hierarchy_to_graphml(&refgraph.hierarchy))?;
    std::fs::write(out.join("reference.graphml"), graphml::reference_to_graphml(&refgraph))?;
    std::fs::write(out.join("sequence.graphml"), graphml::sequence_to_graphml(&merged))?;
    std::fs::write(out.join("quotient.graphml"), graphml::quotient_to_graphml(&q))?;
    println!("\nGraphML written to {}", out.display());
    Ok(())
}
