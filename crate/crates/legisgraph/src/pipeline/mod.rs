//! End-to-end orchestration: parse → extract → graphs → cluster → align
//! → dynamics → stats → export, with deterministic, byte-stable outputs.
//!
//! Every stage can also run on its own (the CLI subcommands map onto
//! [`Stage`]); later stages recompute what they need in process. A failed
//! run removes the files it wrote.

mod alluvial;
mod config;
mod layout;
mod report;
mod svg;
mod viz;

pub use alluvial::{alluvial_data, alluvial_svg, AlluvialBlock, AlluvialData, AlluvialSpline, AlluvialYear};
pub use config::{parse_merge_rule, ClusteringConfig, DynamicsConfig, ExportConfig, PipelineConfig, SequenceConfig};
pub use layout::{fr_layout, FrParams};
pub use report::{family_report_html, family_tfidf_csv, Composition};
pub use svg::{ColorRole, SvgCanvas};
pub use viz::{quotient_viz_data, quotient_viz_svg, QuotientVizData, QuotientVizEdge, QuotientVizNode};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{consensus, visit_rates, Clustering, ConsensusParams, WeightedDigraph};
use crate::corpus::{load_series, snapshot_stats, SnapshotStats};
use crate::dynamics::{
    align_nodes, build_cluster_graph, build_family_graph, chi, cluster_families, family_size_series,
    year_context, ClusterFamily, ClusterGraph, FamilyGraph, NodeAlignment, YearContext,
};
use crate::graphs::{
    build_hierarchy, build_reference, build_sequence, build_subsequence, graphml, merge_rule_selector,
    quotient, ArcSet, HierarchyGraph, QuotientGraph, ReferenceGraph, SequenceGraph, SequenceParams,
};
use crate::refextract::{CitationProfile, ExtractionOutcome};
use crate::stats::{
    document_unit_selector, growth_series, ols_slope, per_unit_breakdown, tfidf_top_terms,
    default_tfidf_exclusions, RegressionResult,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage {
        stage: &'static str,
        message: String,
        /// Data errors (bad corpus, broken references) versus internal
        /// failures.
        data: bool,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// CLI exit code: 1 config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { data: true, .. } => 2,
            _ => 3,
        }
    }
}

/// Pipeline stages in execution order. Running a stage computes all of
/// its prerequisites in process and writes that stage's outputs; `All`
/// writes everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Extract,
    Graph,
    Cluster,
    Align,
    Dynamics,
    Stats,
    Export,
    All,
}

impl Stage {
    fn rank(self) -> u8 {
        match self {
            Stage::Extract => 0,
            Stage::Graph => 1,
            Stage::Cluster => 2,
            Stage::Align => 3,
            Stage::Dynamics => 4,
            Stage::Stats => 5,
            Stage::Export => 6,
            Stage::All => 7,
        }
    }

    fn wants(self, other: Stage) -> bool {
        self == Stage::All || self == other
    }

    fn needs(self, other: Stage) -> bool {
        self == Stage::All || self.rank() >= other.rank() || self.wants(other)
    }
}

/// Runs the whole pipeline and writes the full artifact bundle.
pub fn run_pipeline(config: &PipelineConfig, base_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    run_stage(config, base_dir, Stage::All)
}

/// Runs the pipeline up to (and writes the outputs of) one stage. On
/// error the files written by this run are removed.
pub fn run_stage(
    config: &PipelineConfig,
    base_dir: &Path,
    stage: Stage,
) -> Result<Vec<PathBuf>, PipelineError> {
    config.validate()?;
    let mut tracker = OutputTracker::new(config.output_path(base_dir));
    match execute(config, base_dir, stage, &mut tracker) {
        Ok(()) => Ok(tracker.files),
        Err(e) => {
            tracker.cleanup();
            Err(e)
        }
    }
}

struct OutputTracker {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputTracker {
    fn new(root: PathBuf) -> Self {
        OutputTracker {
            root,
            files: Vec::new(),
        }
    }

    fn write(&mut self, rel: &str, content: &[u8]) -> Result<(), PipelineError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| PipelineError::Io {
                path: parent.display().to_string(),
                source: e,
            })?;
        }
        std::fs::write(&path, content).map_err(|e| PipelineError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        self.files.push(path);
        Ok(())
    }

    /// Removes everything written by this run (best effort), including
    /// directories that became empty.
    fn cleanup(&self) {
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
        for f in &self.files {
            let mut dir = f.parent();
            while let Some(d) = dir {
                if d == self.root.parent().unwrap_or(&self.root) {
                    break;
                }
                let _ = std::fs::remove_dir(d);
                dir = d.parent();
            }
        }
    }
}

fn data_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
        data: true,
    }
}

fn internal_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
        data: false,
    }
}

/// Per-year products carried between stages.
struct YearProducts {
    label: String,
    year: i32,
    extraction: ExtractionOutcome,
    refgraph: ReferenceGraph,
    merged: SequenceGraph,
    subseq: SequenceGraph,
    quotient_graph: QuotientGraph,
    stats: SnapshotStats,
}

#[derive(Serialize, Deserialize)]
struct ConsensusReport {
    runs: u32,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    preferred_n: Option<u32>,
    lambda: f64,
    seed_base: u64,
    tau: f64,
    module_count_histogram: BTreeMap<u32, u32>,
}

#[derive(Serialize, Deserialize)]
struct FamilyMemberReport {
    snapshot_id: String,
    cluster: u32,
    tokens: u64,
}

#[derive(Serialize, Deserialize)]
struct FamilyReport {
    index: usize,
    leading: FamilyMemberReport,
    members: Vec<FamilyMemberReport>,
    /// Per-year sizes keyed by snapshot id; absent years report 0.
    sizes: BTreeMap<String, u64>,
}

fn execute(
    config: &PipelineConfig,
    base_dir: &Path,
    stage: Stage,
    out: &mut OutputTracker,
) -> Result<(), PipelineError> {
    // Ingest.
    let snapshots = load_series(&config.manifest_paths(base_dir)).map_err(data_err("ingest"))?;
    let profile = load_profile(&config.profile, base_dir)?;
    let rho = config.merge_rule()?;

    // Per-year computation through the graph stage.
    let seq_params = SequenceParams {
        rho: rho.clone(),
        decay: crate::graphs::WeightDecay::RootTwo,
        alpha: config.sequence.alpha,
        key_ordering: profile.def.key_ordering,
    };
    let align_params = SequenceParams {
        rho: crate::graphs::MergeRule::None,
        decay: crate::graphs::WeightDecay::RootTwo,
        alpha: config.sequence.alpha,
        key_ordering: profile.def.key_ordering,
    };
    let mut years: Vec<YearProducts> = Vec::with_capacity(snapshots.len());
    for snapshot in &snapshots {
        let label = snapshot.date.year_label();
        let extraction = crate::refextract::extract_all(snapshot, &profile);
        let hierarchy = build_hierarchy(snapshot);
        let refgraph =
            build_reference(hierarchy, &extraction.references).map_err(data_err("graph"))?;
        let merged =
            build_sequence(&refgraph, snapshot, seq_params.clone()).map_err(data_err("graph"))?;
        let subseq = build_subsequence(&refgraph, snapshot, align_params.clone())
            .map_err(data_err("graph"))?;
        let selector = merge_rule_selector(rho.clone());
        let quotient_graph = quotient(&refgraph, &selector, ArcSet::CrossReferencesOnly)
            .map_err(data_err("graph"))?;
        let stats = snapshot_stats(snapshot, Some(extraction.references.len() as u64))
            .map_err(data_err("stats"))?;
        years.push(YearProducts {
            label,
            year: chrono::Datelike::year(&snapshot.date),
            extraction,
            refgraph,
            merged,
            subseq,
            quotient_graph,
            stats,
        });
    }

    if stage.wants(Stage::Extract) {
        for y in &years {
            out.write(&format!("references/{}.csv", y.label), references_csv(y).as_bytes())?;
            out.write(
                &format!("references/{}.report.json", y.label),
                pretty_json(&y.extraction.report)?.as_bytes(),
            )?;
        }
    }
    if stage.wants(Stage::Graph) {
        for y in &years {
            out.write(
                &format!("graphs/{}.hierarchy.graphml", y.label),
                graphml::hierarchy_to_graphml(&y.refgraph.hierarchy).as_bytes(),
            )?;
            out.write(
                &format!("graphs/{}.reference.graphml", y.label),
                graphml::reference_to_graphml(&y.refgraph).as_bytes(),
            )?;
            out.write(
                &format!("graphs/{}.sequence.graphml", y.label),
                graphml::sequence_to_graphml(&y.merged).as_bytes(),
            )?;
            out.write(
                &format!("graphs/{}.subsequence.graphml", y.label),
                graphml::sequence_to_graphml(&y.subseq).as_bytes(),
            )?;
            out.write(
                &format!("graphs/{}.quotient.graphml", y.label),
                graphml::quotient_to_graphml(&y.quotient_graph).as_bytes(),
            )?;
        }
    }
    if !stage.needs(Stage::Cluster) {
        return Ok(());
    }

    // Clustering per year.
    let params = ConsensusParams {
        runs: config.clustering.runs,
        threshold: config.clustering.threshold,
        preferred_n: config.clustering.preferred_n,
        lambda: config.clustering.lambda,
        seed_base: config.clustering.seed_base,
    };
    let mut clusterings: Vec<Clustering> = Vec::with_capacity(years.len());
    let mut histograms: Vec<BTreeMap<u32, u32>> = Vec::with_capacity(years.len());
    for y in &years {
        let digraph =
            WeightedDigraph::from_sequence_graph(&y.merged, config.sequence.include_sequence_arcs);
        let flow = visit_rates(&digraph, config.clustering.tau).map_err(data_err("cluster"))?;
        let result = consensus(&flow, params).map_err(internal_err("cluster"))?;
        let mut clustering = result.clustering;
        clustering.snapshot_id = y.label.clone();
        clusterings.push(clustering);
        histograms.push(result.module_count_histogram);
    }
    if stage.wants(Stage::Cluster) {
        for (y, (clustering, histogram)) in
            years.iter().zip(clusterings.iter().zip(&histograms))
        {
            out.write(
                &format!("clusters/{}.csv", y.label),
                clustering_csv(clustering).as_bytes(),
            )?;
            let report = ConsensusReport {
                runs: params.runs,
                threshold: params.threshold,
                preferred_n: params.preferred_n,
                lambda: params.lambda,
                seed_base: params.seed_base,
                tau: config.clustering.tau,
                module_count_histogram: histogram.clone(),
            };
            out.write(
                &format!("clusters/{}.report.json", y.label),
                pretty_json(&report)?.as_bytes(),
            )?;
        }
    }
    if !stage.needs(Stage::Align) {
        return Ok(());
    }

    // Alignments between adjacent years.
    let mut alignments: Vec<NodeAlignment> = Vec::new();
    for pair in years.windows(2) {
        alignments.push(align_nodes(&pair[0].subseq, &pair[1].subseq));
    }
    if stage.wants(Stage::Align) {
        for (pair, alignment) in years.windows(2).zip(&alignments) {
            out.write(
                &format!("alignments/{}-{}.csv", pair[0].label, pair[1].label),
                alignment_csv(alignment, &pair[0].subseq, &pair[1].subseq).as_bytes(),
            )?;
        }
    }
    if !stage.needs(Stage::Dynamics) {
        return Ok(());
    }

    // Dynamics: cluster graph, family graph, families.
    let mut contexts: Vec<YearContext> = Vec::with_capacity(years.len());
    for (y, clustering) in years.iter().zip(&clusterings) {
        contexts.push(
            year_context(&y.subseq, &y.merged, clustering, &y.refgraph.hierarchy, &y.label)
                .map_err(data_err("dynamics"))?,
        );
    }
    let cluster_graph = build_cluster_graph(&contexts, &alignments).map_err(data_err("dynamics"))?;
    let family_graph =
        build_family_graph(&cluster_graph, config.dynamics.gamma).map_err(data_err("dynamics"))?;
    let families = cluster_families(&family_graph);
    if stage.wants(Stage::Dynamics) {
        out.write(
            "dynamics/cluster_graph.csv",
            cluster_graph_csv(&cluster_graph).as_bytes(),
        )?;
        out.write(
            "dynamics/family_graph.csv",
            family_graph_csv(&family_graph).as_bytes(),
        )?;
        let nodes: Vec<(String, u64)> = cluster_graph
            .nodes
            .iter()
            .map(|n| (format!("{}-{}", n.snapshot_id, n.cluster), n.tokens))
            .collect();
        out.write(
            "dynamics/cluster_graph.graphml",
            graphml::labeled_to_graphml(&nodes, &cluster_graph.arcs, "token-flow").as_bytes(),
        )?;
        out.write(
            "dynamics/family_graph.graphml",
            graphml::labeled_to_graphml(&nodes, &family_graph.arcs, "token-flow").as_bytes(),
        )?;
        let reports: Vec<FamilyReport> = families
            .iter()
            .map(|f| family_report(f, &family_graph, &years))
            .collect();
        out.write("dynamics/families.json", pretty_json(&reports)?.as_bytes())?;
    }
    if !stage.needs(Stage::Stats) {
        return Ok(());
    }

    // Statistics.
    if stage.wants(Stage::Stats) {
        let series: Vec<(String, SnapshotStats)> =
            years.iter().map(|y| (y.label.clone(), y.stats)).collect();
        out.write("growth.csv", growth_csv(&growth_series(&series)).as_bytes())?;
        for y in &years {
            let table = per_unit_breakdown(&y.refgraph, &document_unit_selector)
                .map_err(internal_err("stats"))?;
            out.write(
                &format!("per_unit/{}.csv", y.label),
                per_unit_csv(&table).as_bytes(),
            )?;
        }
        let regressions = family_regressions(&families, &family_graph, &years, config.export.top_families);
        out.write(
            "stats/family_regressions.csv",
            regressions_csv(&regressions).as_bytes(),
        )?;
    }
    if !stage.needs(Stage::Export) {
        return Ok(());
    }

    // Exports.
    if stage.wants(Stage::Export) {
        let data = alluvial_data(
            &cluster_graph,
            &families,
            config.export.top_n_clusters,
            config.export.top_families,
            config.export.flow_threshold,
        );
        out.write("export/alluvial.json", pretty_json(&data)?.as_bytes())?;
        out.write("export/alluvial.svg", alluvial_svg(&data).as_bytes())?;

        let fr = FrParams {
            k: config.export.fr_k,
            seed: config.export.fr_seed,
            iterations: config.export.fr_iterations,
        };
        let family_of: BTreeMap<u32, usize> = families
            .iter()
            .flat_map(|f| f.members.iter().map(move |&m| (m, f.index)))
            .collect();
        for (yi, (y, clustering)) in years.iter().zip(&clusterings).enumerate() {
            let colors =
                class_colors(y, clustering, yi, &cluster_graph, &family_of, config.export.top_families);
            let data = quotient_viz_data(
                &y.quotient_graph,
                &colors,
                config.export.min_tokens,
                config.export.degree_label_threshold,
                &fr,
            );
            out.write(
                &format!("export/quotient_{}.json", y.label),
                pretty_json(&data)?.as_bytes(),
            )?;
            out.write(
                &format!("export/quotient_{}.svg", y.label),
                quotient_viz_svg(&data).as_bytes(),
            )?;
        }

        // Family report: compositions plus TF-IDF terms.
        let compositions = compositions(&years, &clusterings);
        let texts = family_texts(&families, &family_graph, &years, &clusterings, config.export.top_families);
        let tfidf = tfidf_top_terms(&texts, 10, &default_tfidf_exclusions());
        let top: Vec<ClusterFamily> = families
            .iter()
            .filter(|f| f.index < config.export.top_families)
            .cloned()
            .collect();
        out.write(
            "export/families.html",
            family_report_html(&top, &family_graph, &compositions, &tfidf).as_bytes(),
        )?;
        out.write("export/family_tfidf.csv", family_tfidf_csv(&tfidf).as_bytes())?;
    }
    Ok(())
}

trait YearLabel {
    fn year_label(&self) -> String;
}

impl YearLabel for chrono::NaiveDate {
    fn year_label(&self) -> String {
        chrono::Datelike::year(self).to_string()
    }
}

fn load_profile(name: &str, base_dir: &Path) -> Result<CitationProfile, PipelineError> {
    match name {
        "us" | "de" => CitationProfile::builtin(name)
            .map_err(|e| PipelineError::Config(e.to_string())),
        path => CitationProfile::from_file(&base_dir.join(path))
            .map_err(|e| PipelineError::Config(e.to_string())),
    }
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String, PipelineError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(internal_err("serialize"))
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn references_csv(y: &YearProducts) -> String {
    csv_string(|w| {
        w.write_record(["source_id", "target_id"])?;
        for r in &y.extraction.references {
            w.write_record([&r.source_id, &r.target_id])?;
        }
        Ok(())
    })
}

fn clustering_csv(c: &Clustering) -> String {
    csv_string(|w| {
        w.write_record(["node_id", "cluster_id", "seed"])?;
        for (id, &cluster) in c.node_ids.iter().zip(&c.assignments) {
            w.write_record([id.as_str(), &cluster.to_string(), &c.seed.to_string()])?;
        }
        Ok(())
    })
}

fn alignment_csv(a: &NodeAlignment, source: &SequenceGraph, target: &SequenceGraph) -> String {
    csv_string(|w| {
        w.write_record(["source_id", "target_id", "pass"])?;
        for pair in &a.matches {
            w.write_record([
                source.nodes[pair.source as usize].id.as_str(),
                target.nodes[pair.target as usize].id.as_str(),
                &pair.pass.number().to_string(),
            ])?;
        }
        Ok(())
    })
}

fn cluster_graph_csv(cg: &ClusterGraph) -> String {
    csv_string(|w| {
        w.write_record([
            "source_year",
            "source_cluster",
            "target_year",
            "target_cluster",
            "tokens",
        ])?;
        for &(s, t, tokens) in &cg.arcs {
            let a = &cg.nodes[s as usize];
            let b = &cg.nodes[t as usize];
            w.write_record([
                a.snapshot_id.as_str(),
                &a.cluster.to_string(),
                b.snapshot_id.as_str(),
                &b.cluster.to_string(),
                &tokens.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn family_graph_csv(fg: &FamilyGraph) -> String {
    csv_string(|w| {
        w.write_record([
            "source_year",
            "source_cluster",
            "target_year",
            "target_cluster",
            "tokens",
            "chi",
        ])?;
        for &(s, t, tokens) in &fg.arcs {
            let a = &fg.nodes[s as usize];
            let b = &fg.nodes[t as usize];
            w.write_record([
                a.snapshot_id.as_str(),
                &a.cluster.to_string(),
                b.snapshot_id.as_str(),
                &b.cluster.to_string(),
                &tokens.to_string(),
                &format!("{}", chi(a.tokens, b.tokens, tokens)),
            ])?;
        }
        Ok(())
    })
}

fn family_report(f: &ClusterFamily, fg: &FamilyGraph, years: &[YearProducts]) -> FamilyReport {
    let member = |m: u32| {
        let n = &fg.nodes[m as usize];
        FamilyMemberReport {
            snapshot_id: n.snapshot_id.clone(),
            cluster: n.cluster,
            tokens: n.tokens,
        }
    };
    let sizes_vec = family_size_series(f, fg, years.len());
    let sizes = years
        .iter()
        .zip(&sizes_vec)
        .map(|(y, &s)| (y.label.clone(), s))
        .collect();
    FamilyReport {
        index: f.index,
        leading: member(f.leading),
        members: f.members.iter().map(|&m| member(m)).collect(),
        sizes,
    }
}

fn growth_csv(g: &crate::stats::GrowthSeries) -> String {
    csv_string(|w| {
        w.write_record([
            "year",
            "tokens",
            "structures",
            "references",
            "relative_tokens",
            "relative_structures",
            "relative_references",
        ])?;
        for (i, year) in g.years.iter().enumerate() {
            let a = &g.absolute[i];
            w.write_record([
                year.as_str(),
                &a.tokens.to_string(),
                &a.structures.to_string(),
                &a.references.to_string(),
                &format!("{}", g.relative_tokens[i]),
                &format!("{}", g.relative_structures[i]),
                &format!("{}", g.relative_references[i]),
            ])?;
        }
        Ok(())
    })
}

fn per_unit_csv(table: &BTreeMap<String, crate::stats::UnitStats>) -> String {
    csv_string(|w| {
        w.write_record([
            "unit",
            "tokens",
            "structures",
            "out_refs",
            "in_refs",
            "internal_refs",
        ])?;
        for (unit, s) in table {
            w.write_record([
                unit.as_str(),
                &s.tokens.to_string(),
                &s.structures.to_string(),
                &s.out_refs.to_string(),
                &s.in_refs.to_string(),
                &s.internal_refs.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn family_regressions(
    families: &[ClusterFamily],
    fg: &FamilyGraph,
    years: &[YearProducts],
    top: usize,
) -> Vec<(usize, Option<RegressionResult>)> {
    families
        .iter()
        .filter(|f| f.index < top)
        .map(|f| {
            let sizes = family_size_series(f, fg, years.len());
            let series: Vec<(f64, f64)> = years
                .iter()
                .zip(&sizes)
                .map(|(y, &s)| (y.year as f64, s as f64))
                .collect();
            (f.index, ols_slope(&series).ok())
        })
        .collect()
}

fn regressions_csv(rows: &[(usize, Option<RegressionResult>)]) -> String {
    csv_string(|w| {
        w.write_record(["family", "slope", "intercept", "stderr", "p_value"])?;
        for (family, reg) in rows {
            match reg {
                Some(r) => w.write_record([
                    family.to_string(),
                    format!("{}", r.slope),
                    format!("{}", r.intercept),
                    format!("{}", r.std_err),
                    r.p_value.map(|p| format!("{p}")).unwrap_or_default(),
                ])?,
                None => w.write_record([
                    family.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?,
            }
        }
        Ok(())
    })
}

/// Heading path of a merged node's group anchor, e.g.
/// "Title 5 / Chapter One".
fn anchor_path(h: &HierarchyGraph, anchor_id: &str) -> String {
    let Some(mut idx) = h.index_of(anchor_id) else {
        return anchor_id.to_string();
    };
    let mut parts: Vec<String> = Vec::new();
    loop {
        let node = h.node(idx);
        if node.level < 0 {
            break;
        }
        parts.push(
            node.heading
                .clone()
                .unwrap_or_else(|| node.element_id.clone()),
        );
        match h.parent(idx) {
            Some(p) => idx = p,
            None => break,
        }
    }
    parts.reverse();
    parts.join(" / ")
}

fn compositions(
    years: &[YearProducts],
    clusterings: &[Clustering],
) -> BTreeMap<(usize, u32), Composition> {
    let mut out: BTreeMap<(usize, u32), Composition> = BTreeMap::new();
    for (yi, (y, clustering)) in years.iter().zip(clusterings).enumerate() {
        for (mi, node) in y.merged.nodes.iter().enumerate() {
            let cluster = clustering.assignments[mi];
            let path = anchor_path(&y.refgraph.hierarchy, &node.group_key);
            out.entry((yi, cluster))
                .or_default()
                .push((path, node.tokens));
        }
    }
    for comp in out.values_mut() {
        comp.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    }
    out
}

/// Concatenated member texts per family (top families only).
fn family_texts(
    families: &[ClusterFamily],
    fg: &FamilyGraph,
    years: &[YearProducts],
    clusterings: &[Clustering],
    top: usize,
) -> Vec<String> {
    families
        .iter()
        .filter(|f| f.index < top)
        .map(|f| {
            let mut parts: Vec<&str> = Vec::new();
            for &m in &f.members {
                let node = &fg.nodes[m as usize];
                let y = &years[node.year_index];
                let clustering = &clusterings[node.year_index];
                for (mi, seq_node) in y.merged.nodes.iter().enumerate() {
                    if clustering.assignments[mi] == node.cluster && !seq_node.text.is_empty() {
                        parts.push(&seq_node.text);
                    }
                }
            }
            parts.join("\n")
        })
        .collect()
}

/// Color role per quotient class: via the class's merged node and its
/// cluster family.
fn class_colors(
    y: &YearProducts,
    clustering: &Clustering,
    year_index: usize,
    cluster_graph: &ClusterGraph,
    family_of: &BTreeMap<u32, usize>,
    top_families: usize,
) -> BTreeMap<String, ColorRole> {
    let mut colors = BTreeMap::new();
    for (mi, node) in y.merged.nodes.iter().enumerate() {
        let cluster = clustering.assignments[mi];
        let role = cluster_graph
            .node_index(year_index, cluster)
            .and_then(|idx| family_of.get(&idx))
            .map(|&f| {
                if f < top_families {
                    ColorRole::Family(f)
                } else {
                    ColorRole::GreyA
                }
            })
            .unwrap_or(ColorRole::GreyA);
        colors.insert(node.group_key.clone(), role);
    }
    colors
}

/// Re-exported fetcher (see `corpus::uscode`): downloads the annual
/// archives with checksum verification and cache reuse.
pub use crate::corpus::uscode::{fetch_uscode, fetch_uscode_titles, FetchReport, UscodeError};
