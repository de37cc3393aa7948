//! Parse the bundled mini corpus and print structure and token counts.
//!
//! ```bash
//! cargo run --example parse_corpus
//! ```

use std::path::Path;

use legisgraph::corpus::{load_series, snapshot_stats};
use legisgraph::refextract::{extract_all, CitationProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let manifests: Vec<_> = ["1994", "1995", "1996"]
        .iter()
        .map(|y| mini.join(format!("{y}.manifest.json")))
        .collect();
    let snapshots = load_series(&manifests)?;
    let profile = CitationProfile::builtin("us")?;

    println!("{:<6} {:>8} {:>12} {:>12}", "year", "tokens", "structures", "references");
    for snapshot in &snapshots {
        let outcome = extract_all(snapshot, &profile);
        let stats = snapshot_stats(snapshot, Some(outcome.references.len() as u64))?;
        println!(
            "{:<6} {:>8} {:>12} {:>12}",
            snapshot.date.format("%Y"),
            stats.tokens,
            stats.structures,
            stats.references
        );
    }

    // Individual documents and their seqitems.
    let first = &snapshots[0];
    for doc in &first.documents {
        println!(
            "\n{} ({} nodes): {}",
            doc.doc_key(),
            doc.len(),
            doc.root().heading.as_deref().unwrap_or("")
        );
        for idx in doc.seqitem_indices() {
            let n = doc.node(idx);
            println!(
                "  {:<8} level {} tokens {:>3}  {}",
                n.cite_key.as_deref().unwrap_or("-"),
                n.level,
                doc.subtree_tokens(idx, false),
                n.heading.as_deref().unwrap_or("")
            );
        }
    }
    Ok(())
}
