//! Generate a synthetic evolving corpus and write it in canonical form.
//!
//! ```bash
//! cargo run --example synthetic_corpus
//! ```

use legisgraph::corpus::synthetic::{generate, SyntheticSpec};
use legisgraph::corpus::write_snapshot;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        collection_id: "demo".into(),
        start_year: 2010,
        years: 3,
        documents: 2,
        chapters_per_doc: 2,
        sections_per_chapter: 4,
        subsections_per_section: 3,
        reference_density: 0.5,
        edit_rate: 0.05,
        insert_rate: 0.03,
        delete_rate: 0.02,
        rekey_rate: 0.10,
        seed: 99,
    };
    let corpus = generate(&spec);
    let out = std::env::temp_dir().join("legisgraph-synthetic");
    for snapshot in &corpus.snapshots {
        let manifest = write_snapshot(snapshot, &out)?;
        println!(
            "{}: {} documents, {} structures, {} tokens → {}",
            snapshot.date,
            snapshot.documents.len(),
            snapshot.structure_count(),
            snapshot.token_count(),
            manifest.display()
        );
    }
    for (i, truth) in corpus.ground_truth.iter().enumerate() {
        println!(
            "ground truth {} → {}: {} surviving units",
            spec.start_year + i as i32,
            spec.start_year + i as i32 + 1,
            truth.len()
        );
    }
    Ok(())
}
