//! Cite-key normalization and ordering.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// How cite keys are ordered within a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyOrdering {
    /// Mixed alphanumeric natural order: digit runs compare numerically,
    /// letter runs lexicographically, so `1437f` sorts after `1437` and
    /// `99` before `100`.
    #[default]
    Natural,
    /// Plain byte-wise comparison.
    Lexicographic,
}

impl KeyOrdering {
    pub fn compare(self, a: &str, b: &str) -> Ordering {
        match self {
            KeyOrdering::Natural => compare_citekeys(a, b),
            KeyOrdering::Lexicographic => a.cmp(b),
        }
    }
}

/// Canonical form of a cite key: trimmed, internal whitespace removed.
pub fn normalize_citekey(raw: &str) -> String {
    raw.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Natural mixed alphanumeric comparison of cite keys.
pub fn compare_citekeys(a: &str, b: &str) -> Ordering {
    let ra = split_runs(a);
    let rb = split_runs(b);
    for (x, y) in ra.iter().zip(rb.iter()) {
        let ord = match (x, y) {
            (Run::Digits(dx), Run::Digits(dy)) => compare_digit_runs(dx, dy),
            (Run::Digits(_), Run::Other(_)) => Ordering::Less,
            (Run::Other(_), Run::Digits(_)) => Ordering::Greater,
            (Run::Other(sx), Run::Other(sy)) => sx.cmp(sy),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ra.len().cmp(&rb.len()).then_with(|| a.cmp(b))
}

#[derive(Debug, PartialEq)]
enum Run<'a> {
    Digits(&'a str),
    Other(&'a str),
}

fn split_runs(s: &str) -> Vec<Run<'_>> {
    let mut runs = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let digit = bytes[i].is_ascii_digit();
        let mut j = i + 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() == digit {
            j += 1;
        }
        let run = &s[start..j];
        runs.push(if digit {
            Run::Digits(run)
        } else {
            Run::Other(run)
        });
        start = j;
        i = j;
    }
    runs
}

fn compare_digit_runs(a: &str, b: &str) -> Ordering {
    let sa = a.trim_start_matches('0');
    let sb = b.trim_start_matches('0');
    sa.len()
        .cmp(&sb.len())
        .then_with(|| sa.cmp(sb))
        // Equal values: fewer leading zeros first, for a total order.
        .then_with(|| a.len().cmp(&b.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order_examples() {
        assert_eq!(compare_citekeys("1437", "1437f"), Ordering::Less);
        assert_eq!(compare_citekeys("99", "100"), Ordering::Less);
        assert_eq!(compare_citekeys("12/101", "12/102"), Ordering::Less);
        assert_eq!(compare_citekeys("2/5", "12/1"), Ordering::Less);
        assert_eq!(compare_citekeys("BGB/26", "BGB/31a"), Ordering::Less);
        assert_eq!(compare_citekeys("BGB/31a", "BGB/32"), Ordering::Less);
        assert_eq!(compare_citekeys("1437f", "1437f"), Ordering::Equal);
    }

    #[test]
    fn normalization_strips_whitespace() {
        assert_eq!(normalize_citekey(" 12 / 101 "), "12/101");
        assert_eq!(normalize_citekey("BGB/26"), "BGB/26");
    }

    #[test]
    fn leading_zeros_ordered_after_value() {
        assert_eq!(compare_citekeys("007", "7"), Ordering::Greater);
        assert_eq!(compare_citekeys("07", "8"), Ordering::Less);
    }
}
