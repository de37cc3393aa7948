//! Two-level map-equation clustering with consensus.
//!
//! The flow model is PageRank-style: stationary visit rates with
//! unrecorded teleportation at rate τ (dangling nodes teleport uniformly).
//! The two-level map equation of a partition M is
//!
//! ```text
//! L(M) = q H(Q) + Σ_m p_m° H(P_m)
//! ```
//!
//! with q the total module-exit flow, H(Q) the entropy of the normalized
//! exit flows, and H(P_m) the entropy of each module's codebook (its exit
//! rate plus the member visit rates). Expanding the entropies gives the
//! four-term form used throughout:
//!
//! ```text
//! L = plogp(q) − 2 Σ_m plogp(q_m) + Σ_m plogp(q_m + Σ_{v∈m} p_v) − Σ_v plogp(p_v)
//! ```
//!
//! where `plogp(x) = x·log2(x)`. The last term is partition-independent,
//! which keeps module aggregation exact.
//!
//! `infomap_run` minimizes `L(M) + λ·|ln(m / preferred_n)|` (m = module
//! count) by seeded Louvain-style node moves with aggregation sweeps;
//! `consensus` runs many seeds and returns the connected components of the
//! thresholded co-occurrence graph.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("parameter error: {0}")]
    Parameter(String),
}

/// Weighted digraph input to the flow model. Parallel arcs should be
/// pre-summed; `node_sizes` carries token counts for downstream
/// accounting and plays no role in the objective.
#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    pub node_ids: Vec<String>,
    pub node_sizes: Vec<u64>,
    pub arcs: Vec<(u32, u32, f64)>,
}

impl WeightedDigraph {
    pub fn new(node_ids: Vec<String>, node_sizes: Vec<u64>, arcs: Vec<(u32, u32, f64)>) -> Self {
        WeightedDigraph {
            node_ids,
            node_sizes,
            arcs,
        }
    }

    /// Builds the clustering input from a sequence graph. Reference arcs
    /// always contribute; sequence arcs are optional (the headline
    /// configuration clusters on references only).
    pub fn from_sequence_graph(
        g: &crate::graphs::SequenceGraph,
        include_sequence_arcs: bool,
    ) -> Self {
        let mut merged: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for &(s, t) in &g.reference_arcs {
            *merged.entry((s, t)).or_insert(0.0) += g.reference_weight;
        }
        if include_sequence_arcs {
            for a in &g.sequence_arcs {
                *merged.entry((a.source, a.target)).or_insert(0.0) += a.weight;
            }
        }
        WeightedDigraph {
            node_ids: g.nodes.iter().map(|n| n.id.clone()).collect(),
            node_sizes: g.nodes.iter().map(|n| n.tokens).collect(),
            arcs: merged.into_iter().map(|((s, t), w)| (s, t, w)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

/// Stationary flow over a digraph: visit rates plus recorded link flows.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    pub node_ids: Vec<String>,
    pub node_sizes: Vec<u64>,
    /// Stationary visit rates, Σ = 1.
    pub visit_rates: Vec<f64>,
    /// Link flows f(u→v) = p_u·(1−τ)·w_uv/s_u; teleportation and dangling
    /// redistribution are unrecorded.
    pub out_flows: Vec<Vec<(u32, f64)>>,
    pub in_flows: Vec<Vec<(u32, f64)>>,
    pub tau: f64,
    /// Power-iteration diagnostics.
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl FlowGraph {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Computes stationary visit rates by power iteration with unrecorded
/// uniform teleportation at rate `tau`; dangling nodes teleport uniformly.
/// Convergence: L1 change < 1e−12 or 10 000 iterations (non-convergence
/// is reported in the diagnostics, not an error).
pub fn visit_rates(graph: &WeightedDigraph, tau: f64) -> Result<FlowGraph, ClusterError> {
    if graph.is_empty() {
        return Err(ClusterError::Parameter("graph is empty".to_string()));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(ClusterError::Parameter(format!(
            "teleportation rate must lie in [0,1), got {tau}"
        )));
    }
    let n = graph.len();
    let mut out_strength = vec![0.0f64; n];
    for &(s, _, w) in &graph.arcs {
        if w <= 0.0 || !w.is_finite() {
            return Err(ClusterError::Parameter(format!(
                "arc weights must be positive and finite, got {w}"
            )));
        }
        out_strength[s as usize] += w;
    }
    let mut p = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < POWER_MAX_ITER {
        iterations += 1;
        let mut next = vec![0.0f64; n];
        let mut dangling = 0.0;
        for v in 0..n {
            if out_strength[v] == 0.0 {
                dangling += p[v];
            }
        }
        for &(s, t, w) in &graph.arcs {
            next[t as usize] += p[s as usize] * w / out_strength[s as usize];
        }
        let uniform = (tau + (1.0 - tau) * dangling) / n as f64;
        let mut diff = 0.0;
        for v in 0..n {
            let val = (1.0 - tau) * next[v] + uniform;
            diff += (val - p[v]).abs();
            next[v] = val;
        }
        p = next;
        residual = diff;
        if diff < POWER_TOL {
            break;
        }
    }
    let converged = residual < POWER_TOL;

    let mut out_flows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut in_flows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(s, t, w) in &graph.arcs {
        let f = p[s as usize] * (1.0 - tau) * w / out_strength[s as usize];
        out_flows[s as usize].push((t, f));
        in_flows[t as usize].push((s, f));
    }
    Ok(FlowGraph {
        node_ids: graph.node_ids.clone(),
        node_sizes: graph.node_sizes.clone(),
        visit_rates: p,
        out_flows,
        in_flows,
        tau,
        iterations,
        residual,
        converged,
    })
}

/// A partition of flow-graph nodes. Cluster ids are dense integers from 0
/// in order of discovery (first appearance in node order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub snapshot_id: String,
    pub node_ids: Vec<String>,
    pub assignments: Vec<u32>,
    pub seed: u64,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        self.assignments.iter().map(|&c| c + 1).max().unwrap_or(0) as usize
    }

    /// Members per cluster, in cluster-id order.
    pub fn clusters(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c as usize].push(i as u32);
        }
        out
    }

    /// Relabels cluster ids to be dense and ordered by first appearance.
    pub fn canonicalized(mut self) -> Self {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut next = 0u32;
        for c in self.assignments.iter_mut() {
            let label = *remap.entry(*c).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            *c = label;
        }
        self
    }
}

fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Two-level map-equation codelength of a partition, in bits.
/// Deterministic; the partition must be total on the flow nodes.
pub fn codelength(flow: &FlowGraph, partition: &Clustering) -> f64 {
    codelength_of_assignment(flow, &partition.assignments)
}

fn count_modules(assignments: &[u32]) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    for &c in assignments {
        seen.insert(c);
    }
    seen.len()
}

/// Codelength for possibly non-dense labels (optimizer internals).
fn codelength_of_assignment(flow: &FlowGraph, assignments: &[u32]) -> f64 {
    let m = assignments.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut q = vec![0.0f64; m];
    let mut sum_p = vec![0.0f64; m];
    for (v, &c) in assignments.iter().enumerate() {
        sum_p[c as usize] += flow.visit_rates[v];
        for &(t, f) in &flow.out_flows[v] {
            if assignments[t as usize] != c {
                q[c as usize] += f;
            }
        }
    }
    let total_q: f64 = q.iter().sum();
    let mut l = plogp(total_q);
    for i in 0..m {
        l -= 2.0 * plogp(q[i]);
        l += plogp(q[i] + sum_p[i]);
    }
    for v in 0..flow.len() {
        l -= plogp(flow.visit_rates[v]);
    }
    l.max(0.0)
}

fn penalty(module_count: usize, preferred_n: Option<u32>, lambda: f64) -> f64 {
    match preferred_n {
        Some(n) if n > 0 => lambda * (module_count as f64 / n as f64).ln().abs(),
        _ => 0.0,
    }
}

/// The augmented objective optimized by [`infomap_run`].
pub fn augmented_objective(
    flow: &FlowGraph,
    partition: &Clustering,
    preferred_n: Option<u32>,
    lambda: f64,
) -> f64 {
    codelength(flow, partition) + penalty(partition.cluster_count(), preferred_n, lambda)
}

/// One level of the optimizer: an aggregated flow graph.
struct Level {
    p: Vec<f64>,
    out: Vec<Vec<(u32, f64)>>,
    inn: Vec<Vec<(u32, f64)>>,
}

impl Level {
    fn len(&self) -> usize {
        self.p.len()
    }
}

/// Mutable optimizer state over one level.
struct State {
    module_of: Vec<u32>,
    q: Vec<f64>,
    sum_p: Vec<f64>,
    module_size: Vec<u32>,
    total_q: f64,
    module_count: usize,
}

impl State {
    fn singletons(level: &Level) -> State {
        let n = level.len();
        State::from_assignment(level, &(0..n as u32).collect::<Vec<_>>())
    }

    /// State for an arbitrary starting partition. Slot arrays are sized to
    /// the node count so split moves always find a free module.
    fn from_assignment(level: &Level, assignment: &[u32]) -> State {
        let n = level.len();
        let mut q = vec![0.0; n];
        let mut sum_p = vec![0.0; n];
        let mut module_size = vec![0u32; n];
        for v in 0..n {
            let m = assignment[v] as usize;
            sum_p[m] += level.p[v];
            module_size[m] += 1;
            for &(t, f) in &level.out[v] {
                if assignment[t as usize] != assignment[v] {
                    q[m] += f;
                }
            }
        }
        let total_q = q.iter().sum();
        let module_count = module_size.iter().filter(|&&s| s > 0).count();
        State {
            module_of: assignment.to_vec(),
            q,
            sum_p,
            module_size,
            total_q,
            module_count,
        }
    }
}

/// Flow of node `v` towards/from each adjacent module, plus totals.
struct NodeFlows {
    to_module: BTreeMap<u32, f64>,
    from_module: BTreeMap<u32, f64>,
    out_total: f64,
    self_flow: f64,
}

fn node_flows(level: &Level, state: &State, v: usize) -> NodeFlows {
    let mut to_module = BTreeMap::new();
    let mut from_module = BTreeMap::new();
    let mut out_total = 0.0;
    let mut self_flow = 0.0;
    for &(t, f) in &level.out[v] {
        out_total += f;
        if t as usize == v {
            self_flow += f;
        } else {
            *to_module.entry(state.module_of[t as usize]).or_insert(0.0) += f;
        }
    }
    for &(s, f) in &level.inn[v] {
        if s as usize != v {
            *from_module.entry(state.module_of[s as usize]).or_insert(0.0) += f;
        }
    }
    NodeFlows {
        to_module,
        from_module,
        out_total,
        self_flow,
    }
}

struct Optimizer {
    preferred_n: Option<u32>,
    lambda: f64,
}

impl Optimizer {
    /// Evaluates and (if improving) applies node moves in a seeded order;
    /// repeats sweeps until a full sweep makes no move. Tie-breaking among
    /// equal-gain candidates: lowest module id wins.
    fn sweep(&self, level: &Level, state: &mut State, rng: &mut ChaCha8Rng) -> bool {
        let n = level.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut improved_any = false;
        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &v in &order {
                if self.try_move(level, state, v) {
                    moved = true;
                    improved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        improved_any
    }

    fn try_move(&self, level: &Level, state: &mut State, v: usize) -> bool {
        let a = state.module_of[v];
        let flows = node_flows(level, state, v);
        let p_v = level.p[v];
        let a_empties = state.module_size[a as usize] == 1;
        // Candidate target modules: adjacent modules plus one fresh slot
        // (the lowest empty module id, for determinism).
        let mut candidates: Vec<u32> = flows
            .to_module
            .keys()
            .chain(flows.from_module.keys())
            .copied()
            .filter(|&m| m != a)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        if !a_empties {
            if let Some(free) = (0..state.module_size.len() as u32)
                .find(|&m| state.module_size[m as usize] == 0 && !candidates.contains(&m))
            {
                candidates.push(free);
            }
        }
        if candidates.is_empty() {
            return false;
        }

        let to_a = flows.to_module.get(&a).copied().unwrap_or(0.0);
        let from_a = flows.from_module.get(&a).copied().unwrap_or(0.0);
        let exits_v = flows.out_total - flows.self_flow;
        // Removing v from A.
        let q_a_new = if a_empties {
            0.0
        } else {
            state.q[a as usize] - (exits_v - to_a) + from_a
        };
        let sum_a_new = if a_empties {
            0.0
        } else {
            state.sum_p[a as usize] - p_v
        };

        let term = |q: f64, s: f64| -> f64 { plogp(q + s) - 2.0 * plogp(q) };
        let old_term_a = term(state.q[a as usize], state.sum_p[a as usize]);
        let module_count = state.module_count;

        let mut best: Option<(f64, u32, f64, f64)> = None; // (dj, module, q_b_new, total_q_new)
        for &b in &candidates {
            let to_b = flows.to_module.get(&b).copied().unwrap_or(0.0);
            let from_b = flows.from_module.get(&b).copied().unwrap_or(0.0);
            let b_was_empty = state.module_size[b as usize] == 0;
            let q_b_new = state.q[b as usize] - from_b + (exits_v - to_b);
            let sum_b_new = state.sum_p[b as usize] + p_v;
            let total_q_new =
                state.total_q + (q_a_new - state.q[a as usize]) + (q_b_new - state.q[b as usize]);
            let new_count = module_count - usize::from(a_empties) + usize::from(b_was_empty);

            let dl = (plogp(total_q_new) - plogp(state.total_q))
                + (term(q_a_new, sum_a_new) - old_term_a)
                + (term(q_b_new, sum_b_new) - term(state.q[b as usize], state.sum_p[b as usize]));
            let dpen = penalty(new_count, self.preferred_n, self.lambda)
                - penalty(module_count, self.preferred_n, self.lambda);
            let dj = dl + dpen;
            match best {
                None => best = Some((dj, b, q_b_new, total_q_new)),
                Some((bj, bm, _, _)) => {
                    if dj < bj - 1e-15 || ((dj - bj).abs() <= 1e-15 && b < bm) {
                        best = Some((dj, b, q_b_new, total_q_new));
                    }
                }
            }
        }
        let (dj, b, q_b_new, total_q_new) = best.expect("non-empty candidates");
        if dj >= -1e-15 {
            return false;
        }
        // Apply.
        let b_was_empty = state.module_size[b as usize] == 0;
        state.module_of[v] = b;
        state.q[a as usize] = q_a_new;
        state.sum_p[a as usize] = sum_a_new;
        state.module_size[a as usize] -= 1;
        state.q[b as usize] = q_b_new;
        state.sum_p[b as usize] += p_v;
        state.module_size[b as usize] += 1;
        state.total_q = total_q_new;
        state.module_count = state.module_count - usize::from(a_empties) + usize::from(b_was_empty);
        true
    }
}

fn aggregate(level: &Level, state: &State) -> (Level, Vec<u32>) {
    // Dense module relabel by first appearance.
    let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next = 0u32;
    let mut node_to_super = vec![0u32; level.len()];
    for v in 0..level.len() {
        let m = state.module_of[v];
        let label = *remap.entry(m).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        node_to_super[v] = label;
    }
    let m = next as usize;
    let mut p = vec![0.0; m];
    for v in 0..level.len() {
        p[node_to_super[v] as usize] += level.p[v];
    }
    let mut arc_acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for v in 0..level.len() {
        for &(t, f) in &level.out[v] {
            let key = (node_to_super[v], node_to_super[t as usize]);
            *arc_acc.entry(key).or_insert(0.0) += f;
        }
    }
    let mut out: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    let mut inn: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    for ((s, t), f) in arc_acc {
        out[s as usize].push((t, f));
        inn[t as usize].push((s, f));
    }
    (Level { p, out, inn }, node_to_super)
}

/// One seeded optimization run. Identical `(flow, preferred_n, lambda,
/// seed)` inputs give identical output. The returned partition is never
/// worse (by the augmented objective) than the all-singletons or
/// single-module baselines.
pub fn infomap_run_with(
    flow: &FlowGraph,
    preferred_n: Option<u32>,
    lambda: f64,
    seed: u64,
) -> Clustering {
    let n = flow.len();
    let base = Level {
        p: flow.visit_rates.clone(),
        out: flow.out_flows.clone(),
        inn: flow.in_flows.clone(),
    };
    let opt = Optimizer { preferred_n, lambda };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Several restart attempts per run (visit orders drawn from the same
    // seeded stream); greedy moves alone strand small graphs in shallow
    // local minima, restarts recover most of them. The best attempt by
    // the augmented objective wins.
    const ATTEMPTS: usize = 8;
    let mut best_assignment: Option<Vec<u32>> = None;
    let mut best_j = f64::INFINITY;
    for _attempt in 0..ATTEMPTS {
        // Alternate fine-level node moves with coarse-level supernode
        // moves until neither improves.
        let mut assignment: Vec<u32> = (0..n as u32).collect();
        loop {
            let mut improved_outer = false;

            {
                let mut state = State::from_assignment(&base, &assignment);
                if opt.sweep(&base, &mut state, &mut rng) {
                    improved_outer = true;
                }
                assignment = state.module_of;
            }

            // Coarsening ladder: aggregate modules into supernodes and
            // move those, re-aggregating while it helps.
            loop {
                let (level, proj) = project(&base, &assignment);
                if level.len() <= 1 {
                    break;
                }
                let mut state = State::singletons(&level);
                if !opt.sweep(&level, &mut state, &mut rng) {
                    break;
                }
                improved_outer = true;
                for v in 0..n {
                    assignment[v] = state.module_of[proj[v] as usize];
                }
            }

            if !improved_outer {
                break;
            }
        }
        let candidate = Clustering {
            snapshot_id: String::new(),
            node_ids: Vec::new(),
            assignments: assignment,
            seed,
        };
        let j = codelength_of_assignment(flow, &candidate.assignments)
            + penalty(count_modules(&candidate.assignments), preferred_n, lambda);
        if j < best_j - 1e-15 {
            best_j = j;
            best_assignment = Some(candidate.assignments);
        }
    }

    let found = Clustering {
        snapshot_id: String::new(),
        node_ids: flow.node_ids.clone(),
        assignments: best_assignment.expect("at least one attempt"),
        seed,
    }
    .canonicalized();

    // Baselines are candidate states.
    let singletons = Clustering {
        snapshot_id: String::new(),
        node_ids: flow.node_ids.clone(),
        assignments: (0..n as u32).collect(),
        seed,
    };
    let single = Clustering {
        snapshot_id: String::new(),
        node_ids: flow.node_ids.clone(),
        assignments: vec![0; n],
        seed,
    };
    let mut best = found;
    let mut best_j = augmented_objective(flow, &best, preferred_n, lambda);
    for cand in [singletons, single] {
        let j = augmented_objective(flow, &cand, preferred_n, lambda);
        if j < best_j - 1e-15 {
            best_j = j;
            best = cand;
        }
    }
    best
}

/// Projects the base level onto the supernodes induced by `assignment`.
fn project(base: &Level, assignment: &[u32]) -> (Level, Vec<u32>) {
    let state = State {
        module_of: assignment.to_vec(),
        q: Vec::new(),
        sum_p: Vec::new(),
        module_size: Vec::new(),
        total_q: 0.0,
        module_count: 0,
    };
    aggregate(base, &state)
}

/// [`infomap_run_with`] at the default penalty strength λ = 1 bit.
pub fn infomap_run(flow: &FlowGraph, preferred_n: Option<u32>, seed: u64) -> Clustering {
    infomap_run_with(flow, preferred_n, 1.0, seed)
}

/// Parameters of a consensus run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusParams {
    pub runs: u32,
    pub threshold: f64,
    pub preferred_n: Option<u32>,
    pub lambda: f64,
    pub seed_base: u64,
}

impl Default for ConsensusParams {
    fn default() -> Self {
        ConsensusParams {
            runs: 1000,
            threshold: 0.95,
            preferred_n: Some(100),
            lambda: 1.0,
            seed_base: 0,
        }
    }
}

/// Consensus over seeded runs: final clusters, pairwise co-occurrence
/// counts, and the module-count histogram of the underlying runs.
#[derive(Debug, Clone)]
pub struct ConsensusResult {
    pub clustering: Clustering,
    /// Co-occurrence count per node pair (i < j) over all runs.
    pub co_occurrence: BTreeMap<(u32, u32), u32>,
    pub module_count_histogram: BTreeMap<u32, u32>,
    pub params: ConsensusParams,
}

/// Runs `params.runs` seeded optimizations (seeds `seed_base..seed_base+runs`)
/// and returns the connected components of the graph joining node pairs
/// that share a cluster in at least `threshold` of the runs. Fully
/// reproducible for a fixed seed base; runs execute in parallel.
pub fn consensus(flow: &FlowGraph, params: ConsensusParams) -> Result<ConsensusResult, ClusterError> {
    if params.runs == 0 {
        return Err(ClusterError::Parameter("runs must be ≥ 1".to_string()));
    }
    if !(params.threshold > 0.0 && params.threshold <= 1.0) {
        return Err(ClusterError::Parameter(format!(
            "threshold must lie in (0,1], got {}",
            params.threshold
        )));
    }
    let runs: Vec<Clustering> = (0..params.runs)
        .into_par_iter()
        .map(|i| {
            infomap_run_with(
                flow,
                params.preferred_n,
                params.lambda,
                params.seed_base + i as u64,
            )
        })
        .collect();
    Ok(consensus_of_runs(flow, &runs, params))
}

/// Consensus over precomputed clusterings (used by sweeps and tests).
pub fn consensus_of_runs(
    flow: &FlowGraph,
    runs: &[Clustering],
    params: ConsensusParams,
) -> ConsensusResult {
    let n = flow.len();
    let mut co: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut histogram: BTreeMap<u32, u32> = BTreeMap::new();
    for run in runs {
        *histogram.entry(run.cluster_count() as u32).or_insert(0) += 1;
        for members in run.clusters() {
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    *co.entry((members[i], members[j])).or_insert(0) += 1;
                }
            }
        }
    }
    let needed = ((params.threshold * runs.len() as f64) - 1e-9).ceil().max(1.0) as u32;
    let mut uf = UnionFind::new(n);
    for (&(i, j), &count) in &co {
        if count >= needed {
            uf.union(i as usize, j as usize);
        }
    }
    let mut label: BTreeMap<usize, u32> = BTreeMap::new();
    let mut assignments = vec![0u32; n];
    let mut next = 0;
    for v in 0..n {
        let root = uf.find(v);
        let l = *label.entry(root).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        assignments[v] = l;
    }
    ConsensusResult {
        clustering: Clustering {
            snapshot_id: String::new(),
            node_ids: flow.node_ids.clone(),
            assignments,
            seed: params.seed_base,
        },
        co_occurrence: co,
        module_count_histogram: histogram,
        params,
    }
}

/// Plain union-find with path halving.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Lower root wins, keeping labels insertion-order independent.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
