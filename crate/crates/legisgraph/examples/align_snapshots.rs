//! Four-pass node alignment between two synthetic annual snapshots.
//!
//! ```bash
//! cargo run --example align_snapshots
//! ```

use legisgraph::corpus::synthetic::{generate, SyntheticSpec};
use legisgraph::dynamics::{align_nodes, AlignPass};
use legisgraph::graphs::{build_hierarchy, build_reference, build_subsequence, SequenceParams};
use legisgraph::refextract::{extract_all, CitationProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        years: 2,
        documents: 2,
        chapters_per_doc: 3,
        sections_per_chapter: 5,
        subsections_per_section: 3,
        edit_rate: 0.08,
        insert_rate: 0.04,
        delete_rate: 0.03,
        rekey_rate: 0.12,
        seed: 11,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&spec);
    let profile = CitationProfile::builtin("us")?;
    let graphs: Vec<_> = corpus
        .snapshots
        .iter()
        .map(|s| {
            let outcome = extract_all(s, &profile);
            let h = build_hierarchy(s);
            let r = build_reference(h, &outcome.references).expect("valid refs");
            build_subsequence(&r, s, SequenceParams::default()).expect("subsequence graph")
        })
        .collect();

    let alignment = align_nodes(&graphs[0], &graphs[1]);
    let total = graphs[0].nodes.len();
    println!(
        "{} of {} units matched ({:.1}%), {} unmatched at t, {} new at t+1",
        alignment.matches.len(),
        total,
        100.0 * alignment.coverage(),
        alignment.unmatched_source.len(),
        alignment.unmatched_target.len()
    );
    for pass in [
        AlignPass::ExactText,
        AlignPass::KeyAndText,
        AlignPass::Containment,
        AlignPass::NeighborhoodSimilarity,
    ] {
        let count = alignment.matches.iter().filter(|m| m.pass == pass).count();
        println!("  pass {} ({pass:?}): {count}", pass.number());
    }

    // Compare against the generator's ground truth.
    let truth = &corpus.ground_truth[0];
    let mut correct = 0;
    for pair in &alignment.matches {
        let s = &graphs[0].nodes[pair.source as usize].id;
        let t = &graphs[1].nodes[pair.target as usize].id;
        if truth.get(s) == Some(t) {
            correct += 1;
        }
    }
    println!(
        "ground truth agreement: {correct}/{} matches",
        alignment.matches.len()
    );
    Ok(())
}
