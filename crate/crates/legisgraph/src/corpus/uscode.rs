//! Fetcher for the United States Code annual historical archives, plus a
//! minimal importer that turns one raw title file into a canonical
//! document for text accounting.
//!
//! The fetcher downloads per-year, per-title XHTML files into a cache
//! directory, records SHA-256 checksums in a cache manifest, and skips
//! files that are already cached and intact. Structural conversion of the
//! raw XHTML (heading hierarchies, notes, error repair) is out of scope;
//! the shipped importer only recovers the cleaned text of a title so token
//! counts can be spot-checked against an independent oracle.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{CorpusError, ElementKind, Snapshot, TreeBuilder};

/// Coverage of the annual historical archives.
pub const FIRST_ARCHIVE_YEAR: u16 = 1994;
pub const LAST_ARCHIVE_YEAR: u16 = 2018;

const URL_TEMPLATE: &str =
    "https://uscode.house.gov/download/annualhistoricalarchives/XHTML/{year}/{year}usc{title}.htm";

#[derive(Debug, Error)]
pub enum UscodeError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("http error fetching {url}: {message}")]
    Http { url: String, message: String },
    #[error("integrity error: checksum mismatch for {0}")]
    Integrity(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct FetchEntry {
    pub year: u16,
    pub title: u8,
    pub path: PathBuf,
    pub sha256: String,
    /// True when the file was already cached and the download was skipped.
    pub cached: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FetchReport {
    pub entries: Vec<FetchEntry>,
    /// Titles that the archive does not provide for a year (HTTP 404).
    pub missing: Vec<(u16, u8)>,
}

fn cache_manifest_path(cache_dir: &Path) -> PathBuf {
    cache_dir.join("manifest.json")
}

fn load_cache_manifest(cache_dir: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(cache_manifest_path(cache_dir))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default()
}

fn store_cache_manifest(
    cache_dir: &Path,
    manifest: &BTreeMap<String, String>,
) -> Result<(), UscodeError> {
    let path = cache_manifest_path(cache_dir);
    let body = serde_json::to_string_pretty(manifest).expect("string map serializes");
    fs::write(&path, body + "\n").map_err(|e| UscodeError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Downloads the archives for `years` (all titles) into `cache_dir`.
///
/// Cached files are verified against the stored checksum and skipped.
/// Transient HTTP failures are retried once; HTTP 404 marks a title as
/// absent for that year rather than failing the fetch.
pub fn fetch_uscode(years: &[u16], cache_dir: &Path) -> Result<FetchReport, UscodeError> {
    let titles: Vec<u8> = (1..=54).collect();
    fetch_uscode_titles(years, &titles, cache_dir)
}

/// As [`fetch_uscode`], restricted to the given title numbers.
pub fn fetch_uscode_titles(
    years: &[u16],
    titles: &[u8],
    cache_dir: &Path,
) -> Result<FetchReport, UscodeError> {
    for &y in years {
        if !(FIRST_ARCHIVE_YEAR..=LAST_ARCHIVE_YEAR).contains(&y) {
            return Err(UscodeError::Validation(format!(
                "year {y} outside archive coverage {FIRST_ARCHIVE_YEAR}..={LAST_ARCHIVE_YEAR}"
            )));
        }
    }
    fs::create_dir_all(cache_dir).map_err(|e| UscodeError::Io {
        path: cache_dir.display().to_string(),
        source: e,
    })?;
    let mut manifest = load_cache_manifest(cache_dir);
    let mut report = FetchReport::default();
    for &year in years {
        for &title in titles {
            let file = format!("{year}usc{title:02}.htm");
            let path = cache_dir.join(&file);
            if path.exists() {
                let bytes = fs::read(&path).map_err(|e| UscodeError::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                let digest = sha256_hex(&bytes);
                match manifest.get(&file) {
                    Some(expected) if expected != &digest => {
                        return Err(UscodeError::Integrity(file));
                    }
                    Some(_) => {}
                    None => {
                        manifest.insert(file.clone(), digest.clone());
                    }
                }
                report.entries.push(FetchEntry {
                    year,
                    title,
                    path,
                    sha256: digest,
                    cached: true,
                });
                continue;
            }
            let url = URL_TEMPLATE
                .replace("{year}", &year.to_string())
                .replace("{title}", &format!("{title:02}"));
            match download(&url) {
                Ok(bytes) => {
                    let digest = sha256_hex(&bytes);
                    fs::write(&path, &bytes).map_err(|e| UscodeError::Io {
                        path: path.display().to_string(),
                        source: e,
                    })?;
                    manifest.insert(file, digest.clone());
                    report.entries.push(FetchEntry {
                        year,
                        title,
                        path,
                        sha256: digest,
                        cached: false,
                    });
                }
                Err(FetchFailure::NotFound) => report.missing.push((year, title)),
                Err(FetchFailure::Other(message)) => {
                    return Err(UscodeError::Http { url, message })
                }
            }
        }
    }
    store_cache_manifest(cache_dir, &manifest)?;
    Ok(report)
}

enum FetchFailure {
    NotFound,
    Other(String),
}

fn download(url: &str) -> Result<Vec<u8>, FetchFailure> {
    let mut last = String::new();
    for _attempt in 0..2 {
        match ureq::get(url).call() {
            Ok(mut resp) => match resp.body_mut().read_to_vec() {
                Ok(bytes) => return Ok(bytes),
                Err(e) => last = e.to_string(),
            },
            Err(ureq::Error::StatusCode(404)) => return Err(FetchFailure::NotFound),
            Err(e) => last = e.to_string(),
        }
    }
    Err(FetchFailure::Other(last))
}

/// Strips markup from a raw US Code title file, returning cleaned text.
///
/// Scripts, styles, and comments are dropped; tags are removed; character
/// entities are decoded; whitespace is collapsed. This is the "clean the
/// text" step only, without any structural recovery.
pub fn clean_title_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len() / 2);
    let mut rest = raw;
    // Drop script/style blocks first so their contents never count as text.
    let lower = raw.to_lowercase();
    let mut mask: Vec<(usize, usize)> = Vec::new();
    for tag in ["script", "style"] {
        let open = format!("<{tag}");
        let close = format!("</{tag}>");
        let mut at = 0;
        while let Some(s) = lower[at..].find(&open).map(|i| i + at) {
            let Some(e) = lower[s..].find(&close).map(|i| i + s + close.len()) else {
                break;
            };
            mask.push((s, e));
            at = e;
        }
    }
    mask.sort_unstable();
    let masked: String = if mask.is_empty() {
        rest.to_string()
    } else {
        let mut buf = String::with_capacity(raw.len());
        let mut cur = 0;
        for (s, e) in mask {
            if s > cur {
                buf.push_str(&rest[cur..s]);
            }
            cur = cur.max(e);
        }
        buf.push_str(&rest[cur..]);
        buf
    };
    rest = &masked;

    let mut in_tag = false;
    let mut chars = rest.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '<' if rest[i..].starts_with("<!--") => {
                // Skip the whole comment.
                if let Some(end) = rest[i..].find("-->") {
                    let target = i + end + 3;
                    while let Some(&(j, _)) = chars.peek() {
                        if j >= target {
                            break;
                        }
                        chars.next();
                    }
                } else {
                    break;
                }
            }
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                out.push(' ');
            }
            _ if in_tag => {}
            '&' => {
                let tail = &rest[i..];
                let semi = tail.find(';').filter(|&n| n < 10);
                if let Some(n) = semi {
                    let entity = &tail[1..n];
                    let decoded = match entity {
                        "amp" => Some('&'),
                        "lt" => Some('<'),
                        "gt" => Some('>'),
                        "quot" => Some('"'),
                        "apos" => Some('\''),
                        "nbsp" => Some(' '),
                        "sect" => Some('\u{a7}'),
                        "mdash" => Some('\u{2014}'),
                        "ndash" => Some('\u{2013}'),
                        _ => entity
                            .strip_prefix("#x")
                            .and_then(|h| u32::from_str_radix(h, 16).ok())
                            .or_else(|| entity.strip_prefix('#').and_then(|d| d.parse().ok()))
                            .and_then(char::from_u32),
                    };
                    if let Some(d) = decoded {
                        out.push(d);
                        for _ in 0..n {
                            chars.next();
                        }
                        continue;
                    }
                }
                out.push('&');
            }
            _ => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Minimal importer: one raw title file becomes one canonical document
/// holding the cleaned title text in a single seqitem.
pub fn import_title_text(
    raw: &str,
    title: u8,
    date: NaiveDate,
) -> Result<Snapshot, CorpusError> {
    let text = clean_title_text(raw);
    let key = title.to_string();
    let mut b = TreeBuilder::new(
        Some(key.clone()),
        Some(format!("Title {title}")),
        date.to_string(),
        &key,
    );
    b.open(
        ElementKind::Seqitem,
        None,
        Some(format!("{key}/all")),
        false,
    )?;
    b.text(&text)?;
    b.close();
    Snapshot::new("us", date, vec![b.finish()?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_strips_tags_comments_scripts() {
        let raw = r#"<html><head><title>t</title><script>var x = "<p>";</script></head>
        <body><!-- field-start:section --><h3>Sec. 1</h3><p>An owner of eligible
        low-income &amp; housing.</p></body></html>"#;
        let text = clean_title_text(raw);
        assert!(text.contains("An owner of eligible low-income & housing."));
        assert!(!text.contains("var x"));
        assert!(!text.contains("field-start"));
        assert!(!text.contains('<'));
    }

    #[test]
    fn import_counts_tokens_via_corpus_path() {
        let raw = "<body><p>one two</p><p>three&nbsp;four</p></body>";
        let snap = import_title_text(raw, 4, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap()).unwrap();
        assert_eq!(snap.token_count(), 4);
    }

    #[test]
    fn year_validation() {
        let dir = tempfile::tempdir().unwrap();
        let err = fetch_uscode(&[1980], dir.path()).unwrap_err();
        assert!(matches!(err, UscodeError::Validation(_)));
    }

    #[test]
    fn cached_file_skips_network() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("2018usc04.htm");
        fs::write(&file, b"<p>hello</p>").unwrap();
        // No manifest entry yet: accepted, hashed, and recorded as cached.
        let report = fetch_uscode_titles(&[2018], &[4], dir.path()).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert!(report.entries[0].cached);
        // Second run verifies the stored checksum.
        let report2 = fetch_uscode_titles(&[2018], &[4], dir.path()).unwrap();
        assert!(report2.entries[0].cached);
        // Corrupt the file: integrity error.
        fs::write(&file, b"tampered").unwrap();
        assert!(matches!(
            fetch_uscode_titles(&[2018], &[4], dir.path()),
            Err(UscodeError::Integrity(_))
        ));
    }
}
