//! Growth accounting and the OLS/Wald regression over the mini corpus.
//!
//! ```bash
//! cargo run --example growth_stats
//! ```

use std::path::Path;

use legisgraph::corpus::{load_series, snapshot_stats};
use legisgraph::graphs::{build_hierarchy, build_reference};
use legisgraph::refextract::{extract_all, CitationProfile};
use legisgraph::stats::{document_unit_selector, growth_series, ols_slope, per_unit_breakdown};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let manifests: Vec<_> = ["1994", "1995", "1996"]
        .iter()
        .map(|y| mini.join(format!("{y}.manifest.json")))
        .collect();
    let snapshots = load_series(&manifests)?;
    let profile = CitationProfile::builtin("us")?;

    let mut series = Vec::new();
    for snapshot in &snapshots {
        let outcome = extract_all(snapshot, &profile);
        let label = snapshot.date.format("%Y").to_string();
        series.push((
            label,
            snapshot_stats(snapshot, Some(outcome.references.len() as u64))?,
        ));
    }
    let growth = growth_series(&series);
    println!("{:<6} {:>7} {:>10} {:>10}", "year", "tokens", "rel_tokens", "rel_refs");
    for (i, year) in growth.years.iter().enumerate() {
        println!(
            "{:<6} {:>7} {:>10.3} {:>10.3}",
            year, growth.absolute[i].tokens, growth.relative_tokens[i], growth.relative_references[i]
        );
    }

    // Token trend over the years.
    let points: Vec<(f64, f64)> = growth
        .years
        .iter()
        .zip(&growth.absolute)
        .map(|(y, s)| (y.parse::<f64>().unwrap(), s.tokens as f64))
        .collect();
    let fit = ols_slope(&points)?;
    println!(
        "\ntoken trend: {:+.1} tokens/year (intercept {:.1}, t = {:.2}, p = {})",
        fit.slope,
        fit.intercept,
        fit.t_stat,
        fit.p_value.map(|p| format!("{p:.3}")).unwrap_or_else(|| "n/a".into())
    );

    // Per-Title breakdown of the last year.
    let last = snapshots.last().unwrap();
    let outcome = extract_all(last, &profile);
    let refgraph = build_reference(build_hierarchy(last), &outcome.references)?;
    let table = per_unit_breakdown(&refgraph, &document_unit_selector)?;
    println!("\nper-unit breakdown {}:", last.date.format("%Y"));
    println!("{:<12} {:>7} {:>11} {:>9} {:>8} {:>13}", "unit", "tokens", "structures", "out_refs", "in_refs", "internal_refs");
    for (unit, s) in &table {
        println!(
            "{:<12} {:>7} {:>11} {:>9} {:>8} {:>13}",
            unit, s.tokens, s.structures, s.out_refs, s.in_refs, s.internal_refs
        );
    }
    Ok(())
}
