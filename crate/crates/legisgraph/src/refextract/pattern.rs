//! The citation pattern language.
//!
//! Profiles describe citation grammars as data: a set of named regex
//! *fragments* plus top-level *patterns* that reference fragments as
//! `{name}` placeholders. Patterns are compiled to plain regexes at load.
//!
//! Compiled patterns communicate with the parser through a fixed contract
//! of named capture groups:
//!
//! * `nums` (required) — the numeral list naming the cited units;
//! * `doc_num` — an explicit target document number ("of title 42");
//! * `doc_this` — an explicit same-document marker ("of this title");
//! * `law` / `law_abbr` — the name or abbreviation of a cited law,
//!   resolved through the profile's law-name index.
//!
//! A span with neither `doc_num`, `doc_this`, nor a law group inherits the
//! source document.

use std::collections::BTreeMap;

use regex::Regex;

use super::ExtractError;

/// Connector between two numerals in a citation list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connector {
    /// Enumeration ("and", "or", comma): every numeral is a key.
    List,
    /// Range ("through", "bis", dash): endpoints may expand.
    Range,
}

/// Compiled pattern set of one profile.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Regex>,
    num: Regex,
    loctail: Regex,
    list_conn: Regex,
    range_conn: Regex,
}

fn anchored(fragment: &str, what: &str) -> Result<Regex, ExtractError> {
    Regex::new(&format!("^(?:{fragment})")).map_err(|e| ExtractError::Pattern {
        pattern: what.to_string(),
        message: e.to_string(),
    })
}

impl PatternSet {
    /// Compiles patterns after fragment substitution. The fragment table
    /// must define `num` and `loctail`; connector alternations come
    /// pre-built from the profile's connector lists.
    pub fn compile(
        templates: &[String],
        fragments: &BTreeMap<String, String>,
        list_connectors: &str,
        range_connectors: &str,
    ) -> Result<Self, ExtractError> {
        let mut patterns = Vec::with_capacity(templates.len());
        for t in templates {
            let expanded = substitute(t, fragments)?;
            let re = Regex::new(&expanded).map_err(|e| ExtractError::Pattern {
                pattern: t.clone(),
                message: e.to_string(),
            })?;
            patterns.push(re);
        }
        let num_src = fragments
            .get("num")
            .ok_or_else(|| ExtractError::Profile("missing fragment: num".to_string()))?;
        let loctail_src = fragments
            .get("loctail")
            .ok_or_else(|| ExtractError::Profile("missing fragment: loctail".to_string()))?;
        Ok(PatternSet {
            patterns,
            num: anchored(&substitute(num_src, fragments)?, "num")?,
            loctail: anchored(&substitute(loctail_src, fragments)?, "loctail")?,
            list_conn: anchored(list_connectors, "list connectors")?,
            range_conn: anchored(range_connectors, "range connectors")?,
        })
    }

    pub fn patterns(&self) -> &[Regex] {
        &self.patterns
    }

    /// Splits the text of a `nums` capture into numerals and the
    /// connectors joining them. Locators and unit phrases between
    /// numerals are consumed and discarded.
    pub fn tokenize_nums(&self, text: &str) -> Result<Vec<(Option<Connector>, String)>, String> {
        let mut out = Vec::new();
        let mut rest = text;
        let first = self
            .num
            .find(rest)
            .ok_or_else(|| format!("no numeral at start of {text:?}"))?;
        out.push((None, first.as_str().to_string()));
        rest = &rest[first.end()..];
        rest = self.skip_loctail(rest);
        loop {
            let (conn, after) = if let Some(m) = self.range_conn.find(rest) {
                (Connector::Range, &rest[m.end()..])
            } else if let Some(m) = self.list_conn.find(rest) {
                (Connector::List, &rest[m.end()..])
            } else {
                break;
            };
            let Some(m) = self.num.find(after) else {
                // Trailing connector followed by prose; the list ended at
                // the previous numeral.
                break;
            };
            out.push((Some(conn), m.as_str().to_string()));
            rest = &after[m.end()..];
            rest = self.skip_loctail(rest);
        }
        Ok(out)
    }

    fn skip_loctail<'a>(&self, rest: &'a str) -> &'a str {
        match self.loctail.find(rest) {
            Some(m) if m.end() > 0 => &rest[m.end()..],
            _ => rest,
        }
    }
}

/// Expands `{name}` placeholders from the fragment table, iterating until
/// no placeholder remains. Regex repetition braces (`{0,4}`) are left
/// alone because fragment names start with a letter.
pub fn substitute(
    template: &str,
    fragments: &BTreeMap<String, String>,
) -> Result<String, ExtractError> {
    let placeholder = Regex::new(r"\{([a-z][a-z0-9_]*)\}").expect("static regex");
    let mut cur = template.to_string();
    for _round in 0..16 {
        let mut replaced = false;
        let mut out = String::with_capacity(cur.len());
        let mut last = 0;
        for cap in placeholder.captures_iter(&cur) {
            let whole = cap.get(0).expect("capture 0");
            let name = &cap[1];
            let Some(body) = fragments.get(name) else {
                return Err(ExtractError::Profile(format!(
                    "pattern references unknown fragment {{{name}}}"
                )));
            };
            out.push_str(&cur[last..whole.start()]);
            out.push_str("(?:");
            out.push_str(body);
            out.push(')');
            last = whole.end();
            replaced = true;
        }
        out.push_str(&cur[last..]);
        cur = out;
        if !replaced {
            return Ok(cur);
        }
    }
    Err(ExtractError::Profile(
        "fragment substitution did not converge (cycle?)".to_string(),
    ))
}

/// Builds an alternation from literal tokens, longest first so that
/// e.g. `§§` wins over `§`.
pub fn literal_alternation(tokens: &[String]) -> String {
    let mut sorted: Vec<&String> = tokens.iter().collect();
    sorted.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sorted
        .iter()
        .map(|t| regex::escape(t))
        .collect::<Vec<_>>()
        .join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frags() -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        f.insert("num".into(), "[0-9]+[a-z]{0,4}".into());
        f.insert("paren".into(), r"\([0-9a-zA-Z]+\)".into());
        f.insert(
            "loctail".into(),
            r"(?:\s*{paren}|\s+(?:and|or)\s+{paren}|\s+(?:sentence|Satz)\s*[0-9]+)*".into(),
        );
        f
    }

    fn set() -> PatternSet {
        PatternSet::compile(
            &[r"[Ss]ections?\s+(?P<nums>{num}(?:.*)?)".to_string()],
            &frags(),
            r"\s*,\s*(?:and\s+|or\s+)?|\s+(?:and|or)\s+",
            r"\s*(?:through|to|bis|[-–])\s*",
        )
        .unwrap()
    }

    #[test]
    fn substitution_preserves_repetition_braces() {
        let out = substitute("a{num}b{0,4}", &frags()).unwrap();
        assert_eq!(out, "a(?:[0-9]+[a-z]{0,4})b{0,4}");
    }

    #[test]
    fn unknown_fragment_is_error() {
        assert!(substitute("{nope}", &frags()).is_err());
    }

    #[test]
    fn tokenize_list_and_range() {
        let s = set();
        let toks = s.tokenize_nums("32, 33 and 38").unwrap();
        assert_eq!(
            toks,
            vec![
                (None, "32".to_string()),
                (Some(Connector::List), "33".to_string()),
                (Some(Connector::List), "38".to_string()),
            ]
        );
        let toks = s.tokenize_nums("3001 through 3003").unwrap();
        assert_eq!(toks[1].0, Some(Connector::Range));
    }

    #[test]
    fn tokenize_skips_locators_and_units() {
        let s = set();
        let toks = s.tokenize_nums("26 (2) sentence 1").unwrap();
        assert_eq!(toks, vec![(None, "26".to_string())]);
        let toks = s.tokenize_nums("28 and 31a (1) sentence 2").unwrap();
        assert_eq!(
            toks,
            vec![
                (None, "28".to_string()),
                (Some(Connector::List), "31a".to_string()),
            ]
        );
    }

    #[test]
    fn trailing_prose_stops_list() {
        let s = set();
        let toks = s.tokenize_nums("32, 33 and 38, do not apply").unwrap();
        assert_eq!(toks.len(), 3);
    }

    #[test]
    fn longest_literal_first() {
        // Byte length decides; what matters is that no token precedes a
        // token it prefixes.
        let alt = literal_alternation(&["§".into(), "§§".into(), "Art.".into()]);
        assert_eq!(alt, "Art\\.|§§|§");
        let alt = literal_alternation(&["section".into(), "sections".into()]);
        assert_eq!(alt, "sections|section");
    }
}
