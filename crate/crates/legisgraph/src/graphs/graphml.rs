//! GraphML export for all graph types.
//!
//! Node attributes: `kind`, `level`, `citekey`, `tokens`. Edge attributes:
//! `edge_type` ∈ {containment, reference, sequence}, `weight`,
//! `multiplicity`. Output is deterministic: nodes and edges appear in
//! build order, cross-reference multisets are collapsed to one edge with a
//! multiplicity.

use std::fmt::Write as _;

use super::{HierarchyGraph, QuotientGraph, ReferenceGraph, SequenceGraph};

const HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="kind" for="node" attr.name="kind" attr.type="string"/>
  <key id="level" for="node" attr.name="level" attr.type="int"/>
  <key id="citekey" for="node" attr.name="citekey" attr.type="string"/>
  <key id="tokens" for="node" attr.name="tokens" attr.type="long"/>
  <key id="edge_type" for="edge" attr.name="edge_type" attr.type="string"/>
  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>
  <key id="multiplicity" for="edge" attr.name="multiplicity" attr.type="long"/>
  <graph edgedefault="directed">
"#;

const FOOTER: &str = "  </graph>\n</graphml>\n";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_weight(w: f64) -> String {
    // Shortest round-trip float formatting keeps output byte-stable.
    format!("{w}")
}

struct Writer {
    out: String,
}

impl Writer {
    fn new() -> Self {
        Writer {
            out: HEADER.to_string(),
        }
    }

    fn node(&mut self, id: &str, kind: &str, level: Option<i32>, citekey: Option<&str>, tokens: u64) {
        let _ = write!(self.out, "    <node id=\"{}\">", esc(id));
        let _ = write!(self.out, "<data key=\"kind\">{}</data>", esc(kind));
        if let Some(l) = level {
            let _ = write!(self.out, "<data key=\"level\">{l}</data>");
        }
        if let Some(k) = citekey {
            let _ = write!(self.out, "<data key=\"citekey\">{}</data>", esc(k));
        }
        let _ = writeln!(self.out, "<data key=\"tokens\">{tokens}</data></node>");
    }

    fn edge(&mut self, source: &str, target: &str, edge_type: &str, weight: f64, multiplicity: u64) {
        let _ = writeln!(
            self.out,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"edge_type\">{}</data><data key=\"weight\">{}</data><data key=\"multiplicity\">{multiplicity}</data></edge>",
            esc(source),
            esc(target),
            edge_type,
            fmt_weight(weight),
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str(FOOTER);
        self.out
    }
}

pub fn hierarchy_to_graphml(g: &HierarchyGraph) -> String {
    let mut w = Writer::new();
    for n in g.nodes() {
        w.node(
            &n.element_id,
            n.kind.map(|k| k.as_str()).unwrap_or("collection"),
            Some(n.level),
            n.cite_key.as_deref(),
            n.tokens,
        );
    }
    for (p, c) in g.arcs() {
        w.edge(
            &g.node(p).element_id,
            &g.node(c).element_id,
            "containment",
            1.0,
            1,
        );
    }
    w.finish()
}

pub fn reference_to_graphml(g: &ReferenceGraph) -> String {
    let mut w = Writer::new();
    let h = &g.hierarchy;
    for n in h.nodes() {
        w.node(
            &n.element_id,
            n.kind.map(|k| k.as_str()).unwrap_or("collection"),
            Some(n.level),
            n.cite_key.as_deref(),
            n.tokens,
        );
    }
    for (p, c) in h.arcs() {
        w.edge(
            &h.node(p).element_id,
            &h.node(c).element_id,
            "containment",
            1.0,
            1,
        );
    }
    for ((s, t), m) in g.cross_ref_multiplicities() {
        w.edge(
            &h.node(s).element_id,
            &h.node(t).element_id,
            "reference",
            1.0,
            m,
        );
    }
    w.finish()
}

pub fn sequence_to_graphml(g: &SequenceGraph) -> String {
    let mut w = Writer::new();
    let kind = match g.granularity {
        super::Granularity::Seqitem => "seqitem",
        super::Granularity::Subseqitem => "subseqitem",
    };
    for n in &g.nodes {
        w.node(&n.id, kind, None, Some(&n.key), n.tokens);
    }
    for a in &g.sequence_arcs {
        w.edge(
            &g.nodes[a.source as usize].id,
            &g.nodes[a.target as usize].id,
            "sequence",
            a.weight,
            1,
        );
    }
    let mut mult = std::collections::BTreeMap::new();
    for &(s, t) in &g.reference_arcs {
        *mult.entry((s, t)).or_insert(0u64) += 1;
    }
    for ((s, t), m) in mult {
        w.edge(
            &g.nodes[s as usize].id,
            &g.nodes[t as usize].id,
            "reference",
            g.reference_weight,
            m,
        );
    }
    w.finish()
}

/// GraphML for a generic labeled digraph with token-sized nodes and
/// weighted arcs (cluster and family graphs).
pub fn labeled_to_graphml(
    nodes: &[(String, u64)],
    edges: &[(u32, u32, u64)],
    edge_type: &str,
) -> String {
    let mut w = Writer::new();
    for (label, tokens) in nodes {
        w.node(label, "cluster", None, None, *tokens);
    }
    for &(s, t, tokens) in edges {
        w.edge(
            &nodes[s as usize].0,
            &nodes[t as usize].0,
            edge_type,
            tokens as f64,
            tokens,
        );
    }
    w.finish()
}

pub fn quotient_to_graphml(g: &QuotientGraph) -> String {
    let mut w = Writer::new();
    for c in &g.classes {
        w.node(&c.key, "class", None, None, c.tokens);
    }
    for a in &g.arcs {
        w.edge(
            &g.classes[a.source as usize].key,
            &g.classes[a.target as usize].key,
            "reference",
            1.0,
            a.multiplicity,
        );
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::corpus::{ElementKind, Snapshot, TreeBuilder};
    use chrono::NaiveDate;

    fn tiny() -> Snapshot {
        let mut b = TreeBuilder::new(Some("5".into()), None, "1994-01-01".into(), "5");
        b.open(ElementKind::Seqitem, Some("§ 1".into()), Some("5/1<&>".into()), false)
            .unwrap();
        b.text("one two").unwrap();
        b.close();
        b.open(ElementKind::Seqitem, None, Some("5/2".into()), false).unwrap();
        b.text("three").unwrap();
        b.close();
        Snapshot::new("us", NaiveDate::from_ymd_opt(1994, 1, 1).unwrap(), vec![b.finish().unwrap()])
            .unwrap()
    }

    #[test]
    fn exports_are_well_formed_and_complete() {
        let snap = tiny();
        let h = build_hierarchy(&snap);
        let refs = vec![crate::refextract::ResolvedReference {
            source_id: "5:0".into(),
            target_id: "5:1".into(),
            cite_key: "5/2".into(),
        }];
        let r = build_reference(h, &refs).unwrap();
        let s = build_sequence(&r, &snap, SequenceParams::default()).unwrap();
        let q = quotient(&r, &|h, i| Some(h.node(i).element_id.clone()), ArcSet::All).unwrap();

        let hx = hierarchy_to_graphml(&r.hierarchy);
        assert_eq!(hx.matches("<node ").count(), r.hierarchy.node_count());
        assert_eq!(hx.matches("<edge ").count(), r.hierarchy.arc_count());

        let rx = reference_to_graphml(&r);
        assert_eq!(
            rx.matches("<edge ").count(),
            r.hierarchy.arc_count() + 1 // cross refs collapse by multiplicity
        );
        assert!(rx.contains("edge_type\">reference"));

        let sx = sequence_to_graphml(&s);
        assert_eq!(sx.matches("<node ").count(), s.nodes.len());
        assert!(sx.contains("edge_type\">sequence"));

        let qx = quotient_to_graphml(&q);
        assert_eq!(qx.matches("<node ").count(), q.classes.len());

        // Escaping of attribute/text content.
        assert!(!hx.contains("5/1<&>"));
        assert!(hx.contains("5/1&lt;&amp;&gt;"));

        // Deterministic output.
        assert_eq!(rx, reference_to_graphml(&r));
    }
}
