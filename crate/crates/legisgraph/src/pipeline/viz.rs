//! Quotient-graph figure data: filtered nodes sized by tokens, arcs with
//! opacity scaled over the observed multiplicity range, and labels for
//! well-connected nodes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layout::{fr_layout, FrParams};
use super::svg::{ColorRole, SvgCanvas};
use crate::graphs::QuotientGraph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientVizNode {
    pub key: String,
    pub tokens: u64,
    pub x: f64,
    pub y: f64,
    pub color: ColorRole,
    pub labeled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientVizEdge {
    pub source: usize,
    pub target: usize,
    pub multiplicity: u64,
    pub opacity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientVizData {
    pub nodes: Vec<QuotientVizNode>,
    pub edges: Vec<QuotientVizEdge>,
}

/// Prepares quotient-graph figure data.
///
/// Classes below `min_tokens` are hidden (their arcs with them); labels
/// appear only on nodes whose combined in- and out-reference count meets
/// `degree_label_threshold`. Edge opacity is scaled linearly from the
/// minimum to the maximum multiplicity among the drawn arcs, covering the
/// full range; with uniform multiplicities every arc is fully opaque.
pub fn quotient_viz_data(
    quotient: &QuotientGraph,
    colors: &BTreeMap<String, ColorRole>,
    min_tokens: u64,
    degree_label_threshold: u64,
    fr: &FrParams,
) -> QuotientVizData {
    let shown: Vec<usize> = quotient
        .classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.tokens >= min_tokens)
        .map(|(i, _)| i)
        .collect();
    let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
    for (d, &orig) in shown.iter().enumerate() {
        dense.insert(orig, d);
    }

    // Combined in+out reference counts (self-citations excluded).
    let mut degree: BTreeMap<usize, u64> = BTreeMap::new();
    for arc in &quotient.arcs {
        if arc.source == arc.target {
            continue;
        }
        *degree.entry(arc.source as usize).or_insert(0) += arc.multiplicity;
        *degree.entry(arc.target as usize).or_insert(0) += arc.multiplicity;
    }

    let mut edges: Vec<QuotientVizEdge> = Vec::new();
    for arc in &quotient.arcs {
        if arc.source == arc.target {
            continue;
        }
        let (Some(&s), Some(&t)) = (
            dense.get(&(arc.source as usize)),
            dense.get(&(arc.target as usize)),
        ) else {
            continue;
        };
        edges.push(QuotientVizEdge {
            source: s,
            target: t,
            multiplicity: arc.multiplicity,
            opacity: 0.0,
        });
    }
    let min_mult = edges.iter().map(|e| e.multiplicity).min().unwrap_or(0);
    let max_mult = edges.iter().map(|e| e.multiplicity).max().unwrap_or(0);
    for e in &mut edges {
        e.opacity = if max_mult == min_mult {
            1.0
        } else {
            let span = (max_mult - min_mult) as f64;
            0.15 + 0.85 * (e.multiplicity - min_mult) as f64 / span
        };
    }

    // Layout over the shown subgraph; attraction weighted by relative
    // multiplicity.
    let max_w = max_mult.max(1) as f64;
    let layout_edges: Vec<(u32, u32, f64)> = edges
        .iter()
        .map(|e| (e.source as u32, e.target as u32, e.multiplicity as f64 / max_w))
        .collect();
    let positions = fr_layout(shown.len(), &layout_edges, fr);

    let nodes = shown
        .iter()
        .zip(positions)
        .map(|(&orig, (x, y))| {
            let class = &quotient.classes[orig];
            QuotientVizNode {
                key: class.key.clone(),
                tokens: class.tokens,
                x,
                y,
                color: colors
                    .get(&class.key)
                    .copied()
                    .unwrap_or(ColorRole::GreyA),
                labeled: degree.get(&orig).copied().unwrap_or(0) >= degree_label_threshold,
            }
        })
        .collect();
    QuotientVizData { nodes, edges }
}

const VIZ_SIZE: f64 = 800.0;
const VIZ_MARGIN: f64 = 50.0;

/// Renders the quotient figure: arcs under nodes, node area proportional
/// to tokens, labels for the `labeled` nodes.
pub fn quotient_viz_svg(data: &QuotientVizData) -> String {
    let mut canvas = SvgCanvas::new(VIZ_SIZE, VIZ_SIZE);
    // Map layout coordinates into the canvas.
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in &data.nodes {
        min_x = min_x.min(n.x);
        max_x = max_x.max(n.x);
        min_y = min_y.min(n.y);
        max_y = max_y.max(n.y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let scale = (VIZ_SIZE - 2.0 * VIZ_MARGIN) / span;
    let px = |x: f64| VIZ_MARGIN + (x - min_x) * scale;
    let py = |y: f64| VIZ_MARGIN + (y - min_y) * scale;

    let max_tokens = data.nodes.iter().map(|n| n.tokens).max().unwrap_or(1).max(1);
    let radius = |tokens: u64| 3.0 + 22.0 * (tokens as f64 / max_tokens as f64).sqrt();

    for e in &data.edges {
        let a = &data.nodes[e.source];
        let b = &data.nodes[e.target];
        canvas.line(px(a.x), py(a.y), px(b.x), py(b.y), "#333333", 1.2, e.opacity);
    }
    for n in &data.nodes {
        canvas.circle(px(n.x), py(n.y), radius(n.tokens), n.color.hex());
    }
    for n in &data.nodes {
        if n.labeled {
            canvas.text(px(n.x) + radius(n.tokens) + 2.0, py(n.y), 10.0, &n.key);
        }
    }
    canvas.finish()
}
