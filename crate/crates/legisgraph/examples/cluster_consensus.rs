//! Map-equation clustering with consensus on a planted 4×4-clique ring.
//!
//! ```bash
//! cargo run --release --example cluster_consensus
//! ```

use legisgraph::cluster::{
    codelength, consensus, infomap_run, visit_rates, Clustering, ConsensusParams, WeightedDigraph,
};

fn clique_ring() -> WeightedDigraph {
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
    WeightedDigraph::new((0..16).map(|i| format!("n{i}")).collect(), vec![1; 16], arcs)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = clique_ring();
    let flow = visit_rates(&graph, 0.15)?;
    println!(
        "flow converged after {} iterations (residual {:.2e})",
        flow.iterations, flow.residual
    );

    // Codelengths of reference partitions.
    let planted = Clustering {
        snapshot_id: String::new(),
        node_ids: flow.node_ids.clone(),
        assignments: (0..16).map(|v| v / 4).collect(),
        seed: 0,
    };
    let single = Clustering {
        assignments: vec![0; 16],
        ..planted.clone()
    };
    let singletons = Clustering {
        assignments: (0..16).collect(),
        ..planted.clone()
    };
    println!("L(planted 4 cliques) = {:.4} bits", codelength(&flow, &planted));
    println!("L(single module)     = {:.4} bits", codelength(&flow, &single));
    println!("L(all singletons)    = {:.4} bits", codelength(&flow, &singletons));

    // One seeded run, then consensus over 1000 seeds.
    let one = infomap_run(&flow, Some(4), 42);
    println!("single run (seed 42): {:?}", one.assignments);
    let result = consensus(
        &flow,
        ConsensusParams {
            runs: 1000,
            threshold: 0.95,
            preferred_n: Some(4),
            lambda: 1.0,
            seed_base: 0,
        },
    )?;
    println!(
        "consensus over 1000 runs: {} clusters {:?}",
        result.clustering.cluster_count(),
        result.clustering.assignments
    );
    println!("module-count histogram: {:?}", result.module_count_histogram);
    Ok(())
}
