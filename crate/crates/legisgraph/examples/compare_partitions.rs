//! Partition comparison metrics plus the sensitivity and robustness
//! harnesses on a planted fixture.
//!
//! ```bash
//! cargo run --release --example compare_partitions
//! ```

use legisgraph::cluster::{visit_rates, ConsensusParams, WeightedDigraph};
use legisgraph::stats::{ari, nmi, robustness_sweep, sensitivity_sweep, PartitionPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Reference cases.
    let identical = PartitionPair::new(vec![0, 0, 1, 1], vec![1, 1, 0, 0])?;
    let crossed = PartitionPair::new(vec![0, 0, 1, 1], vec![0, 1, 0, 1])?;
    println!("identical: NMI = {}, ARI = {}", nmi(&identical), ari(&identical));
    println!("crossed:   NMI = {}, ARI = {}", nmi(&crossed), ari(&crossed));

    // Planted clique ring.
    let mut arcs = Vec::new();
    for k in 0..4u32 {
        let base = 4 * k;
        for i in 0..4 {
            for j in (i + 1)..4 {
                arcs.push((base + i, base + j, 1.0));
                arcs.push((base + j, base + i, 1.0));
            }
        }
        let next = 4 * ((k + 1) % 4);
        arcs.push((base + 3, next, 1.0));
        arcs.push((next, base + 3, 1.0));
    }
    let graph = WeightedDigraph::new((0..16).map(|i| format!("n{i}")).collect(), vec![1; 16], arcs);
    let flow = visit_rates(&graph, 0.15)?;
    let params = ConsensusParams {
        runs: 200,
        threshold: 0.95,
        preferred_n: Some(4),
        lambda: 1.0,
        seed_base: 0,
    };

    // Sensitivity to the preferred module count, against baseline 4.
    let settings = [Some(2), Some(4), Some(8), None];
    println!("\nsensitivity against baseline preferred_n = 4:");
    for point in sensitivity_sweep(&flow, &settings, 4, params)? {
        let label = point
            .preferred_n
            .map(|n| n.to_string())
            .unwrap_or_else(|| "auto".into());
        println!("  preferred {:<5} NMI = {:.3}  ARI = {:.3}", label, point.nmi, point.ari);
    }

    // Robustness: pairwise similarity of repeated consensus runs by
    // consensus size.
    println!("\nrobustness over 6 repeats:");
    for point in robustness_sweep(&flow, &[1, 10, 100], 6, params)? {
        println!(
            "  consensus of {:<4} median NMI = {:.3}  median ARI = {:.3}",
            point.consensus_size,
            point.median_nmi(),
            point.median_ari()
        );
    }
    Ok(())
}
