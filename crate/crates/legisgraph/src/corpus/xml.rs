//! Reader and writer for the canonical corpus XML.
//!
//! The canonical format is deliberately narrow: UTF-8, a `document` root
//! with optional `abbreviation`/`heading` and a required `date` attribute,
//! nested `item`/`seqitem`/`subseqitem` elements, text content only inside
//! `seqitem`/`subseqitem`, and an optional `appendix="true"` flag marking
//! excluded subtrees. The reader accepts exactly that grammar (plus XML
//! declarations, comments, and character/entity references) and reports
//! byte offsets on errors; doctypes, processing instructions, CDATA, and
//! namespaces are rejected.

use super::{CorpusError, DocumentTree, ElementKind, TreeBuilder};

/// Parses one canonical corpus XML document.
pub fn parse_document(xml: &[u8]) -> Result<DocumentTree, CorpusError> {
    parse_document_with_key(xml, "doc")
}

/// Like [`parse_document`], with a fallback document key used when the
/// root carries no `abbreviation` (typically the manifest file stem).
pub fn parse_document_with_key(xml: &[u8], fallback_key: &str) -> Result<DocumentTree, CorpusError> {
    let text = std::str::from_utf8(xml).map_err(|e| CorpusError::Parse {
        offset: e.valid_up_to(),
        message: "input is not valid UTF-8".to_string(),
    })?;
    let mut p = Parser {
        src: text,
        pos: 0,
        builder: None,
        depth: 0,
        fallback_key,
    };
    p.skip_bom();
    p.skip_misc()?;
    p.parse_root()?;
    p.skip_misc()?;
    if p.pos != p.src.len() {
        return Err(p.err("content after document element"));
    }
    let builder = p.builder.take().expect("root parsed");
    builder.finish()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    builder: Option<TreeBuilder>,
    depth: usize,
    fallback_key: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn schema_err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::Schema {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_bom(&mut self) {
        if self.rest().starts_with('\u{feff}') {
            self.pos += '\u{feff}'.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Skips whitespace, the XML declaration, and comments outside elements.
    fn skip_misc(&mut self) -> Result<(), CorpusError> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<?xml") {
                match self.rest().find("?>") {
                    Some(end) => self.pos += end + 2,
                    None => return Err(self.err("unterminated XML declaration")),
                }
            } else if self.rest().starts_with("<!--") {
                self.skip_comment()?;
            } else if self.rest().starts_with("<!") || self.rest().starts_with("<?") {
                return Err(self.err("doctypes and processing instructions are not supported"));
            } else {
                return Ok(());
            }
        }
    }

    fn skip_comment(&mut self) -> Result<(), CorpusError> {
        debug_assert!(self.rest().starts_with("<!--"));
        match self.rest().find("-->") {
            Some(end) => {
                self.pos += end + 3;
                Ok(())
            }
            None => Err(self.err("unterminated comment")),
        }
    }

    fn parse_root(&mut self) -> Result<(), CorpusError> {
        if !self.rest().starts_with('<') {
            return Err(self.err("expected document element"));
        }
        let (name, attrs, self_closing) = self.parse_open_tag()?;
        if name != "document" {
            return Err(self.schema_err(format!("root element must be document, found {name}")));
        }
        let mut abbreviation = None;
        let mut heading = None;
        let mut date = None;
        for (k, v) in attrs {
            match k.as_str() {
                "abbreviation" => abbreviation = Some(v),
                "heading" => heading = Some(v),
                "date" => date = Some(v),
                "appendix" => {
                    return Err(self.schema_err("document may not carry the appendix flag"))
                }
                other => {
                    return Err(self.schema_err(format!("unknown attribute {other} on document")))
                }
            }
        }
        let date = date.ok_or_else(|| self.schema_err("document requires a date attribute"))?;
        self.builder = Some(TreeBuilder::new(
            abbreviation,
            heading,
            date,
            self.fallback_key,
        ));
        if self_closing {
            return Ok(());
        }
        self.parse_content("document")
    }

    /// Parses element content until the matching close tag.
    fn parse_content(&mut self, open_name: &str) -> Result<(), CorpusError> {
        loop {
            let Some(lt) = self.rest().find('<') else {
                return Err(self.err(format!("missing close tag for {open_name}")));
            };
            if lt > 0 {
                let raw = &self.rest()[..lt];
                let decoded = self.decode_text(raw)?;
                // Whitespace between child elements is layout, not content.
                if !decoded.trim().is_empty() {
                    let b = self.builder.as_mut().expect("root open");
                    b.text(&decoded)
                        .map_err(|e| self.lift_structure_err(e))?;
                }
                self.pos += lt;
                continue;
            }
            if self.rest().starts_with("<!--") {
                self.skip_comment()?;
                continue;
            }
            if self.rest().starts_with("</") {
                let name = self.parse_close_tag()?;
                if name != open_name {
                    return Err(self.err(format!(
                        "close tag {name} does not match open tag {open_name}"
                    )));
                }
                return Ok(());
            }
            if self.rest().starts_with("<![") || self.rest().starts_with("<!") || self.rest().starts_with("<?") {
                return Err(self.err("CDATA, doctypes, and processing instructions are not supported"));
            }
            let (name, attrs, self_closing) = self.parse_open_tag()?;
            let kind = ElementKind::from_tag(&name)
                .ok_or_else(|| self.schema_err(format!("unknown element kind {name}")))?;
            if kind == ElementKind::Document {
                return Err(self.schema_err("document elements may not nest"));
            }
            let mut heading = None;
            let mut cite_key = None;
            let mut appendix = false;
            for (k, v) in attrs {
                match k.as_str() {
                    "heading" => heading = Some(v),
                    "citekey" if kind == ElementKind::Seqitem => cite_key = Some(v),
                    "appendix" => match v.as_str() {
                        "true" => appendix = true,
                        "false" => appendix = false,
                        other => {
                            return Err(
                                self.schema_err(format!("appendix must be true/false, got {other}"))
                            )
                        }
                    },
                    other => {
                        return Err(self.schema_err(format!(
                            "unknown attribute {other} on {name}"
                        )))
                    }
                }
            }
            {
                let b = self.builder.as_mut().expect("root open");
                b.open(kind, heading, cite_key, appendix)
                    .map_err(|e| self.lift_structure_err(e))?;
            }
            self.depth += 1;
            if self.depth > 200 {
                return Err(self.err("element nesting too deep"));
            }
            if !self_closing {
                self.parse_content(&name)?;
            }
            self.depth -= 1;
            self.builder.as_mut().expect("root open").close();
        }
    }

    /// Structure errors found mid-parse keep their category but gain no
    /// offset; schema violations read better with one.
    fn lift_structure_err(&self, e: CorpusError) -> CorpusError {
        match e {
            CorpusError::Structure(m) => CorpusError::Structure(format!("{m} (near byte {})", self.pos)),
            other => other,
        }
    }

    fn parse_open_tag(&mut self) -> Result<(String, Vec<(String, String)>, bool), CorpusError> {
        debug_assert!(self.rest().starts_with('<'));
        self.pos += 1;
        let name = self.parse_name()?;
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            if self.rest().starts_with("/>") {
                self.pos += 2;
                return Ok((name, attrs, true));
            }
            if self.rest().starts_with('>') {
                self.pos += 1;
                return Ok((name, attrs, false));
            }
            if self.rest().is_empty() {
                return Err(self.err("unterminated start tag"));
            }
            let key = self.parse_name()?;
            self.skip_ws();
            if !self.rest().starts_with('=') {
                return Err(self.err("expected = after attribute name"));
            }
            self.pos += 1;
            self.skip_ws();
            let quote = match self.rest().chars().next() {
                Some(q @ ('"' | '\'')) => q,
                _ => return Err(self.err("attribute value must be quoted")),
            };
            self.pos += 1;
            let Some(end) = self.rest().find(quote) else {
                return Err(self.err("unterminated attribute value"));
            };
            let raw = &self.rest()[..end];
            let value = self.decode_text(raw)?;
            self.pos += end + 1;
            attrs.push((key, value));
        }
    }

    fn parse_close_tag(&mut self) -> Result<String, CorpusError> {
        debug_assert!(self.rest().starts_with("</"));
        self.pos += 2;
        let name = self.parse_name()?;
        self.skip_ws();
        if !self.rest().starts_with('>') {
            return Err(self.err("malformed close tag"));
        }
        self.pos += 1;
        Ok(name)
    }

    fn parse_name(&mut self) -> Result<String, CorpusError> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '-'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err("expected a name"));
        }
        let name = rest[..end].to_string();
        self.pos += end;
        Ok(name)
    }

    fn decode_text(&self, raw: &str) -> Result<String, CorpusError> {
        if raw.contains('<') {
            return Err(self.err("raw < in text content"));
        }
        if !raw.contains('&') {
            return Ok(raw.to_string());
        }
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        while let Some(amp) = rest.find('&') {
            out.push_str(&rest[..amp]);
            rest = &rest[amp..];
            let Some(semi) = rest.find(';') else {
                return Err(self.err("unterminated entity reference"));
            };
            let entity = &rest[1..semi];
            match entity {
                "amp" => out.push('&'),
                "lt" => out.push('<'),
                "gt" => out.push('>'),
                "quot" => out.push('"'),
                "apos" => out.push('\''),
                _ => {
                    let cp = if let Some(hex) = entity.strip_prefix("#x") {
                        u32::from_str_radix(hex, 16).ok()
                    } else if let Some(dec) = entity.strip_prefix('#') {
                        dec.parse::<u32>().ok()
                    } else {
                        None
                    };
                    match cp.and_then(char::from_u32) {
                        Some(c) => out.push(c),
                        None => return Err(self.err(format!("unknown entity &{entity};"))),
                    }
                }
            }
            rest = &rest[semi + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Serializes a document tree back to canonical XML.
///
/// Reparsing the output yields a tree node-by-node equal to the input.
/// Elements without text content are indented; text-bearing elements are
/// written without layout whitespace so content survives round trips.
pub fn serialize_document(tree: &DocumentTree) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write_node(tree, 0, 0, &mut out);
    out.push('\n');
    out
}

fn write_node(tree: &DocumentTree, idx: usize, indent: usize, out: &mut String) {
    let n = tree.node(idx);
    let pad = "  ".repeat(indent);
    out.push_str(&pad);
    out.push('<');
    out.push_str(n.kind.as_str());
    if let Some(a) = &n.abbreviation {
        push_attr(out, "abbreviation", a);
    }
    if let Some(h) = &n.heading {
        push_attr(out, "heading", h);
    }
    if n.kind == ElementKind::Document {
        push_attr(out, "date", &tree.date);
    }
    if let Some(k) = &n.cite_key {
        push_attr(out, "citekey", k);
    }
    if n.appendix {
        push_attr(out, "appendix", "true");
    }
    let children = tree.children(idx);
    if n.text.is_empty() && children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    let text_bearing = !n.text.is_empty();
    if text_bearing {
        // No layout whitespace inside text-bearing elements.
        out.push_str(&escape_text(&n.text));
        for &c in children {
            write_inline(tree, c, out);
        }
        out.push_str("</");
        out.push_str(n.kind.as_str());
        out.push('>');
    } else {
        for &c in children {
            out.push('\n');
            write_node(tree, c, indent + 1, out);
        }
        out.push('\n');
        out.push_str(&pad);
        out.push_str("</");
        out.push_str(n.kind.as_str());
        out.push('>');
    }
}

fn write_inline(tree: &DocumentTree, idx: usize, out: &mut String) {
    let n = tree.node(idx);
    out.push('<');
    out.push_str(n.kind.as_str());
    if let Some(h) = &n.heading {
        push_attr(out, "heading", h);
    }
    if let Some(k) = &n.cite_key {
        push_attr(out, "citekey", k);
    }
    if n.appendix {
        push_attr(out, "appendix", "true");
    }
    let children = tree.children(idx);
    if n.text.is_empty() && children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    out.push_str(&escape_text(&n.text));
    for &c in children {
        write_inline(tree, c, out);
    }
    out.push_str("</");
    out.push_str(n.kind.as_str());
    out.push('>');
}

fn push_attr(out: &mut String, key: &str, value: &str) {
    out.push(' ');
    out.push_str(key);
    out.push_str("=\"");
    out.push_str(&escape_attr(value));
    out.push('"');
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn escape_attr(s: &str) -> String {
    escape_text(s).replace('"', "&quot;")
}
