//! Minimal SVG rendering: rectangles, circles, lines, Bézier bands, and
//! text, with the family color scheme shared by all figure exports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Color role of a drawn cluster or node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", content = "family", rename_all = "kebab-case")]
pub enum ColorRole {
    /// One of the distinctly colored top families.
    Family(usize),
    /// Alternating greys for everything else.
    GreyA,
    GreyB,
    /// The per-year miscellaneous aggregate.
    Misc,
}

/// Twenty distinct family colors; greys alternate for the rest, light
/// grey marks the miscellaneous cluster.
const FAMILY_PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#17becf", "#9edae5",
    "#bcbd22", "#dbdb8d", "#7f7f7f", "#c7c7c7",
];

impl ColorRole {
    pub fn hex(&self) -> &'static str {
        match self {
            ColorRole::Family(i) => FAMILY_PALETTE[i % FAMILY_PALETTE.len()],
            ColorRole::GreyA => "#a0a0a0",
            ColorRole::GreyB => "#c8c8c8",
            ColorRole::Misc => "#e3e3e3",
        }
    }
}

fn fnum(v: f64) -> String {
    // Two decimals keep files small and byte-stable.
    format!("{v:.2}")
}

pub struct SvgCanvas {
    width: f64,
    height: f64,
    body: String,
}

impl SvgCanvas {
    pub fn new(width: f64, height: f64) -> Self {
        SvgCanvas {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"  <rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            fnum(x),
            fnum(y),
            fnum(w),
            fnum(h),
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"  <circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            fnum(cx),
            fnum(cy),
            fnum(r),
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, opacity: f64) {
        let _ = writeln!(
            self.body,
            r#"  <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}" stroke-opacity="{}"/>"#,
            fnum(x1),
            fnum(y1),
            fnum(x2),
            fnum(y2),
            fnum(width),
            fnum(opacity),
        );
    }

    /// A vertical flow band: a filled shape running from the bottom edge
    /// segment [x1, x1+w1] at y1 to the top edge segment [x2, x2+w2] at
    /// y2, with cubic Bézier sides.
    pub fn band(&mut self, x1: f64, w1: f64, y1: f64, x2: f64, w2: f64, y2: f64, fill: &str, opacity: f64) {
        let mid = (y1 + y2) / 2.0;
        let _ = writeln!(
            self.body,
            r#"  <path d="M {} {} C {} {}, {} {}, {} {} L {} {} C {} {}, {} {}, {} {} Z" fill="{fill}" fill-opacity="{}"/>"#,
            fnum(x1),
            fnum(y1),
            fnum(x1),
            fnum(mid),
            fnum(x2),
            fnum(mid),
            fnum(x2),
            fnum(y2),
            fnum(x2 + w2),
            fnum(y2),
            fnum(x2 + w2),
            fnum(mid),
            fnum(x1 + w1),
            fnum(mid),
            fnum(x1 + w1),
            fnum(y1),
            fnum(opacity),
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let escaped = content
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"  <text x="{}" y="{}" font-size="{}" font-family="sans-serif">{escaped}</text>"#,
            fnum(x),
            fnum(y),
            fnum(size),
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            fnum(self.width),
            fnum(self.height),
            fnum(self.width),
            fnum(self.height),
            self.body
        )
    }
}
