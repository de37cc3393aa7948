//! Alluvial figure data: per-year cluster blocks plus inter-year token
//! flows, with small clusters condensed into one miscellaneous block per
//! year.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::svg::{ColorRole, SvgCanvas};
use crate::dynamics::{chi, ClusterFamily, ClusterGraph};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlluvialBlock {
    /// Cluster id within its year; `None` marks the miscellaneous block.
    pub cluster: Option<u32>,
    pub tokens: u64,
    /// Family index when the block belongs to one of the drawn families.
    pub family: Option<usize>,
    pub color: ColorRole,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlluvialYear {
    pub snapshot_id: String,
    pub total_tokens: u64,
    /// Sorted by tokens descending; the miscellaneous block is last.
    pub blocks: Vec<AlluvialBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlluvialSpline {
    /// Index of the source year; the target year is `source_year + 1`.
    pub source_year: usize,
    pub source_block: usize,
    pub target_block: usize,
    pub tokens: u64,
}

/// Figure data for the alluvial plot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlluvialData {
    pub years: Vec<AlluvialYear>,
    pub splines: Vec<AlluvialSpline>,
}

/// Builds the alluvial data: per-year blocks sorted by size with at most
/// `top_n` drawn clusters (the rest condense into the miscellaneous
/// block), and splines for every flow carrying at least `flow_threshold`
/// of the tokens of both its endpoint clusters. Parallel flows into or
/// out of the miscellaneous block merge into one spline.
pub fn alluvial_data(
    cg: &ClusterGraph,
    families: &[ClusterFamily],
    top_n: usize,
    top_families: usize,
    flow_threshold: f64,
) -> AlluvialData {
    let year_count = cg
        .nodes
        .iter()
        .map(|n| n.year_index + 1)
        .max()
        .unwrap_or(0);
    let mut family_of: BTreeMap<u32, usize> = BTreeMap::new();
    for f in families {
        for &m in &f.members {
            family_of.insert(m, f.index);
        }
    }

    // Blocks per year.
    let mut years: Vec<AlluvialYear> = Vec::with_capacity(year_count);
    // Cluster-graph node index → (year, block index).
    let mut block_of: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for year in 0..year_count {
        let mut members: Vec<u32> = (0..cg.nodes.len() as u32)
            .filter(|&i| cg.nodes[i as usize].year_index == year)
            .collect();
        members.sort_by(|&a, &b| {
            let na = &cg.nodes[a as usize];
            let nb = &cg.nodes[b as usize];
            nb.tokens.cmp(&na.tokens).then(na.cluster.cmp(&nb.cluster))
        });
        let snapshot_id = members
            .first()
            .map(|&m| cg.nodes[m as usize].snapshot_id.clone())
            .unwrap_or_default();
        let (drawn, condensed) = if members.len() > top_n {
            members.split_at(top_n)
        } else {
            (&members[..], &[][..])
        };
        let mut blocks = Vec::new();
        let mut grey_toggle = false;
        for &m in drawn {
            let node = &cg.nodes[m as usize];
            let family = family_of.get(&m).copied();
            let color = match family {
                Some(f) if f < top_families => ColorRole::Family(f),
                _ => {
                    grey_toggle = !grey_toggle;
                    if grey_toggle {
                        ColorRole::GreyA
                    } else {
                        ColorRole::GreyB
                    }
                }
            };
            block_of.insert(m, (year, blocks.len()));
            blocks.push(AlluvialBlock {
                cluster: Some(node.cluster),
                tokens: node.tokens,
                family: family.filter(|&f| f < top_families),
                color,
            });
        }
        if !condensed.is_empty() {
            let misc_index = blocks.len();
            let mut tokens = 0;
            for &m in condensed {
                tokens += cg.nodes[m as usize].tokens;
                block_of.insert(m, (year, misc_index));
            }
            blocks.push(AlluvialBlock {
                cluster: None,
                tokens,
                family: None,
                color: ColorRole::Misc,
            });
        }
        let total_tokens = blocks.iter().map(|b| b.tokens).sum();
        years.push(AlluvialYear {
            snapshot_id,
            total_tokens,
            blocks,
        });
    }

    // Splines: χ-filtered flows, remapped to blocks, parallel flows into
    // the miscellaneous blocks merged.
    let mut merged: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    for &(s, t, w) in &cg.arcs {
        let cs = cg.nodes[s as usize].tokens;
        let ct = cg.nodes[t as usize].tokens;
        if chi(cs, ct, w) < flow_threshold {
            continue;
        }
        let (sy, sb) = block_of[&s];
        let (_, tb) = block_of[&t];
        *merged.entry((sy, sb, tb)).or_insert(0) += w;
    }
    let splines = merged
        .into_iter()
        .map(|((source_year, source_block, target_block), tokens)| AlluvialSpline {
            source_year,
            source_block,
            target_block,
            tokens,
        })
        .collect();

    AlluvialData { years, splines }
}

const CANVAS_WIDTH: f64 = 1000.0;
const MARGIN: f64 = 60.0;
const BAR_HEIGHT: f64 = 18.0;
const YEAR_GAP: f64 = 60.0;
const BLOCK_GAP: f64 = 2.0;

/// Renders the alluvial data as SVG. The widest year spans the full
/// drawing width; block and spline widths share one token scale.
pub fn alluvial_svg(data: &AlluvialData) -> String {
    let max_tokens = data
        .years
        .iter()
        .map(|y| y.total_tokens)
        .max()
        .unwrap_or(0)
        .max(1);
    let max_blocks = data.years.iter().map(|y| y.blocks.len()).max().unwrap_or(1);
    let usable = CANVAS_WIDTH - 2.0 * MARGIN - BLOCK_GAP * (max_blocks.saturating_sub(1)) as f64;
    let scale = usable / max_tokens as f64;
    let height = MARGIN * 2.0
        + data.years.len() as f64 * BAR_HEIGHT
        + (data.years.len().saturating_sub(1)) as f64 * YEAR_GAP;
    let mut canvas = SvgCanvas::new(CANVAS_WIDTH, height);

    // Block geometry: (x, width) per (year, block).
    let mut geom: Vec<Vec<(f64, f64)>> = Vec::with_capacity(data.years.len());
    for (yi, year) in data.years.iter().enumerate() {
        let y = MARGIN + yi as f64 * (BAR_HEIGHT + YEAR_GAP);
        let mut x = MARGIN;
        let mut row = Vec::with_capacity(year.blocks.len());
        for block in &year.blocks {
            let w = block.tokens as f64 * scale;
            row.push((x, w));
            canvas.rect(x, y, w.max(0.5), BAR_HEIGHT, block.color.hex());
            x += w + BLOCK_GAP;
        }
        canvas.text(8.0, y + BAR_HEIGHT - 4.0, 12.0, &year.snapshot_id);
        geom.push(row);
    }

    // Spline anchors: sequential cursors along the bottom of each source
    // block and the top of each target block.
    let mut out_cursor: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut in_cursor: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut anchored: Vec<(usize, f64, f64, f64, f64, u64, ColorRole)> = Vec::new();
    let mut by_target: Vec<usize> = (0..data.splines.len()).collect();
    // Out anchors in (source, target) order, in anchors in (target,
    // source) order.
    for (si, spline) in data.splines.iter().enumerate() {
        let w = spline.tokens as f64 * scale;
        let cur = out_cursor
            .entry((spline.source_year, spline.source_block))
            .or_insert(0.0);
        let x1 = geom[spline.source_year][spline.source_block].0 + *cur;
        *cur += w;
        anchored.push((
            si,
            x1,
            w,
            0.0,
            0.0,
            spline.tokens,
            data.years[spline.source_year].blocks[spline.source_block].color,
        ));
    }
    by_target.sort_by_key(|&si| {
        let s = &data.splines[si];
        (s.source_year, s.target_block, s.source_block)
    });
    for &si in &by_target {
        let spline = &data.splines[si];
        let w = spline.tokens as f64 * scale;
        let target_year = spline.source_year + 1;
        let cur = in_cursor.entry((target_year, spline.target_block)).or_insert(0.0);
        let x2 = geom[target_year][spline.target_block].0 + *cur;
        *cur += w;
        anchored[si].3 = x2;
        anchored[si].4 = w;
    }
    // Largest flows plotted last.
    anchored.sort_by_key(|a| a.5);
    for (si, x1, w1, x2, w2, _, color) in anchored {
        let spline = &data.splines[si];
        let y1 = MARGIN + spline.source_year as f64 * (BAR_HEIGHT + YEAR_GAP) + BAR_HEIGHT;
        let y2 = MARGIN + (spline.source_year + 1) as f64 * (BAR_HEIGHT + YEAR_GAP);
        canvas.band(x1, w1, y1, x2, w2, y2, color.hex(), 0.5);
    }
    canvas.finish()
}
