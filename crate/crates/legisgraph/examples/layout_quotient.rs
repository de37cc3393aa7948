//! Force-directed layout and the quotient-graph figure.
//!
//! ```bash
//! cargo run --example layout_quotient
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use legisgraph::corpus::load_snapshot;
use legisgraph::graphs::{
    build_hierarchy, build_reference, merge_rule_selector, quotient, ArcSet, MergeRule,
};
use legisgraph::pipeline::{fr_layout, quotient_viz_data, quotient_viz_svg, ColorRole, FrParams};
use legisgraph::refextract::{extract_all, CitationProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The layout settles two connected nodes near the optimal distance k.
    let params = FrParams::default();
    let positions = fr_layout(2, &[(0, 1, 1.0)], &params);
    let d = ((positions[0].0 - positions[1].0).powi(2) + (positions[0].1 - positions[1].1).powi(2)).sqrt();
    println!("two-node layout distance: {d:.3} (k = {})", params.k);

    // Quotient figure of the 1994 mini snapshot.
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let snapshot = load_snapshot(&mini.join("1994.manifest.json"))?;
    let outcome = extract_all(&snapshot, &CitationProfile::builtin("us")?);
    let refgraph = build_reference(build_hierarchy(&snapshot), &outcome.references)?;
    let selector = merge_rule_selector(MergeRule::ChapterOrTitle);
    let q = quotient(&refgraph, &selector, ArcSet::CrossReferencesOnly)?;

    let mut colors = BTreeMap::new();
    for (i, class) in q.classes.iter().enumerate() {
        colors.insert(class.key.clone(), ColorRole::Family(i % 20));
    }
    let data = quotient_viz_data(&q, &colors, 1, 2, &params);
    println!("{} nodes drawn, {} edges", data.nodes.len(), data.edges.len());
    for node in &data.nodes {
        println!(
            "  {:<8} tokens {:>3} at ({:>6.2}, {:>6.2}){}",
            node.key,
            node.tokens,
            node.x,
            node.y,
            if node.labeled { " [labeled]" } else { "" }
        );
    }
    let out = std::env::temp_dir().join("legisgraph-quotient.svg");
    std::fs::write(&out, quotient_viz_svg(&data))?;
    println!("SVG written to {}", out.display());
    Ok(())
}
