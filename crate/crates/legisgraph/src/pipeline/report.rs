//! Cluster-family reports: per-cluster composition tables (paths with
//! shares of the cluster) as HTML, and TF-IDF top terms as CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dynamics::{ClusterFamily, FamilyGraph};

/// Composition of one cluster: summarized elements by path with their
/// token counts.
pub type Composition = Vec<(String, u64)>;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the family report. `compositions` maps (year index, cluster)
/// to the member paths with token counts; `tfidf` carries the ranked
/// terms per family.
pub fn family_report_html(
    families: &[ClusterFamily],
    fg: &FamilyGraph,
    compositions: &BTreeMap<(usize, u32), Composition>,
    tfidf: &[Vec<(String, f64)>],
) -> String {
    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n<title>Cluster families</title>\n\
         <style>body{font-family:sans-serif}table{border-collapse:collapse;margin:0.5em 0}\
         td,th{border:1px solid #999;padding:2px 6px;text-align:left}</style>\n</head>\n<body>\n\
         <h1>Cluster families</h1>\n",
    );
    for family in families {
        let leading = &fg.nodes[family.leading as usize];
        let _ = writeln!(
            out,
            "<h2>Family {} (leading cluster {}-{}, {} tokens)</h2>",
            family.index, esc(&leading.snapshot_id), leading.cluster, leading.tokens
        );
        if let Some(terms) = tfidf.get(family.index) {
            if !terms.is_empty() {
                let joined: Vec<String> =
                    terms.iter().map(|(t, _)| esc(t)).collect();
                let _ = writeln!(out, "<p>Top terms: {}</p>", joined.join(", "));
            }
        }
        for &member in &family.members {
            let node = &fg.nodes[member as usize];
            let _ = writeln!(
                out,
                "<h3>Cluster {}-{} ({} tokens)</h3>",
                esc(&node.snapshot_id),
                node.cluster,
                node.tokens
            );
            let Some(parts) = compositions.get(&(node.year_index, node.cluster)) else {
                continue;
            };
            let _ = writeln!(out, "<table><tr><th>Path</th><th>Tokens</th><th>Share</th></tr>");
            for (path, tokens) in parts {
                let share = if node.tokens == 0 {
                    0.0
                } else {
                    *tokens as f64 / node.tokens as f64 * 100.0
                };
                let _ = writeln!(
                    out,
                    "<tr><td>{}</td><td>{}</td><td>{:.1}%</td></tr>",
                    esc(path),
                    tokens,
                    share
                );
            }
            let _ = writeln!(out, "</table>");
        }
    }
    out.push_str("</body>\n</html>\n");
    out
}

/// TF-IDF terms as CSV: family, rank, term, score.
pub fn family_tfidf_csv(tfidf: &[Vec<(String, f64)>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "rank", "term", "score"])
        .expect("header");
    for (family, terms) in tfidf.iter().enumerate() {
        for (rank, (term, score)) in terms.iter().enumerate() {
            w.write_record([
                family.to_string(),
                (rank + 1).to_string(),
                term.clone(),
                format!("{score}"),
            ])
            .expect("row");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ClusterNode;

    #[test]
    fn report_shares_sum_to_hundred() {
        let fg = FamilyGraph {
            nodes: vec![ClusterNode {
                snapshot_id: "1994".into(),
                year_index: 0,
                cluster: 0,
                tokens: 300,
            }],
            arcs: vec![],
            gamma: 0.15,
        };
        let families = vec![ClusterFamily {
            index: 0,
            members: vec![0],
            leading: 0,
        }];
        let mut comp = BTreeMap::new();
        comp.insert(
            (0usize, 0u32),
            vec![
                ("Title 5 / Chapter One".to_string(), 100u64),
                ("Title 5 / Chapter Two".to_string(), 200u64),
            ],
        );
        let tfidf = vec![vec![("housing".to_string(), 1.5)]];
        let html = family_report_html(&families, &fg, &comp, &tfidf);
        assert!(html.contains("33.3%"));
        assert!(html.contains("66.7%"));
        assert!(html.contains("Top terms: housing"));
        assert!(html.contains("Title 5 / Chapter One"));
        // Singleton composition shows 100%.
        let mut comp1 = BTreeMap::new();
        comp1.insert((0usize, 0u32), vec![("Only".to_string(), 300u64)]);
        let html = family_report_html(&families, &fg, &comp1, &tfidf);
        assert!(html.contains("100.0%"));
    }

    #[test]
    fn tfidf_csv_shape() {
        let csv = family_tfidf_csv(&[vec![("a".into(), 2.0), ("b".into(), 1.0)], vec![]]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("family,rank,term,score"));
        assert_eq!(lines.next(), Some("0,1,a,2"));
        assert_eq!(lines.next(), Some("0,2,b,1"));
        assert_eq!(lines.next(), None);
    }
}
