//! Run Find → Parse on sample statutory text with both builtin citation
//! profiles.
//!
//! ```bash
//! cargo run --example extract_references
//! ```

use legisgraph::corpus::{ElementKind, StructuralElement};
use legisgraph::refextract::{find_references, parse_span, CitationProfile, ParseContext};

fn element(text: &str) -> StructuralElement {
    StructuralElement {
        id: "demo".into(),
        kind: ElementKind::Seqitem,
        level: 1,
        heading: None,
        cite_key: None,
        abbreviation: None,
        text: text.into(),
        appendix: false,
    }
}

fn show(profile: &CitationProfile, ambient: &str, text: &str) {
    println!("\n[{} profile] {text}", profile.def.name);
    let el = element(text);
    let ctx = ParseContext {
        ambient_doc_key: ambient,
    };
    for span in find_references(&el, profile) {
        match parse_span(&span, profile, ctx) {
            Ok(keyset) => {
                let keys: Vec<String> = keyset.keys.iter().map(|k| k.full()).collect();
                println!("  span {:?} → {}", span.raw, keys.join(", "));
            }
            Err(issue) => println!("  span {:?} → dropped ({issue:?})", span.raw),
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let us = CitationProfile::builtin("us")?;
    show(
        &us,
        "12",
        "An insurance contract may be terminated pursuant to section 1715t of this title only \
         in accordance with a plan of action, or in accordance with section 4114 of this title.",
    );
    show(
        &us,
        "12",
        "...determined under paragraph (1) or (2) of section 4104(b) of this title exceed 120 \
         percent of the fair market rental (established under section 1437f(c) of title 42).",
    );
    show(&us, "10", "as described in sections 3001 through 3004 of this title");
    show(&us, "12", "as defined in section 5 of the Social Security Act");

    let de = CitationProfile::builtin("de")?;
    show(
        &de,
        "BGB",
        "The provisions of section 26 (2) sentence 1, section 27 (1) and (3), sections 28 and \
         31a (1) sentence 2, as well as sections 32, 33 and 38, do not apply.",
    );
    show(&de, "KWG", "Die Anforderungen der §§ 5a bis 5c gelten entsprechend.");
    Ok(())
}
