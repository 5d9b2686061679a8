//! Lenient HTML text extraction.
//!
//! The input is scanned once into visible text blocks. Block boundaries are
//! opened and closed by block-level elements; `script`, `style`, `noscript`,
//! `template` and comments contribute nothing. The relaxed setting keeps every
//! block, the strict one keeps only blocks that look like running prose.

use serde::{Deserialize, Serialize};

/// Extraction operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    /// High precision: only text-dense blocks with few links.
    Strict,
    /// High recall: all visible text.
    Relaxed,
}

/// Thresholds of the strict text-density filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub min_block_chars: usize,
    pub max_link_fraction: f64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            min_block_chars: 80,
            max_link_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    pub text: String,
    pub link_fraction: f64,
}

impl Block {
    fn passes(&self, cfg: &ExtractorConfig) -> bool {
        self.text.chars().count() >= cfg.min_block_chars && self.link_fraction <= cfg.max_link_fraction
    }
}

const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "caption", "center", "dd", "details",
    "dialog", "dir", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form",
    "frameset", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hgroup", "hr", "html", "legend",
    "li", "main", "menu", "nav", "ol", "p", "pre", "section", "summary", "table", "tbody", "td",
    "tfoot", "th", "thead", "tr", "ul",
];

/// Elements whose content is never visible; skipped up to their end tag.
const HIDDEN_TAGS: &[&str] = &["script", "style", "noscript", "template", "iframe", "object"];

#[derive(Default)]
struct Scan {
    title: Option<String>,
    blocks: Vec<Block>,
    buf: String,
    link_buf_chars: usize,
    link_depth: usize,
    in_head: bool,
}

impl Scan {
    fn push_text(&mut self, raw: &str) {
        if self.in_head {
            return;
        }
        let text = html_escape::decode_html_entities(raw);
        if self.link_depth > 0 {
            self.link_buf_chars += text.chars().filter(|c| !c.is_whitespace()).count();
        }
        self.buf.push_str(&text);
    }

    fn flush(&mut self) {
        let total = self.buf.chars().filter(|c| !c.is_whitespace()).count();
        if total > 0 {
            let text = self.buf.split_whitespace().collect::<Vec<_>>().join(" ");
            self.blocks.push(Block {
                text,
                link_fraction: self.link_buf_chars as f64 / total as f64,
            });
        }
        self.buf.clear();
        self.link_buf_chars = 0;
    }
}

/// Case-insensitive search for `</name` starting at `from`.
fn find_end_tag(html: &str, from: usize, name: &str) -> Option<usize> {
    let bytes = html.as_bytes();
    let needle_len = name.len() + 2;
    let mut i = from;
    while let Some(off) = html[i..].find("</") {
        let at = i + off;
        if at + needle_len <= bytes.len() && html[at + 2..at + needle_len].eq_ignore_ascii_case(name) {
            return Some(at);
        }
        i = at + 2;
    }
    None
}

/// Index just past the `>` closing a tag that starts at `from`, honouring
/// quoted attribute values. Returns `html.len()` when unterminated.
fn tag_end(html: &str, from: usize) -> usize {
    let mut quote: Option<u8> = None;
    for (i, &b) in html.as_bytes()[from..].iter().enumerate() {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => return from + i + 1,
            None => {}
        }
    }
    html.len()
}

pub(crate) fn scan(html: &str) -> (String, Vec<Block>) {
    let mut st = Scan::default();
    let bytes = html.as_bytes();
    let mut pos = 0;
    let mut text_start = 0;

    while pos < bytes.len() {
        if bytes[pos] != b'<' {
            pos += 1;
            continue;
        }
        let rest = &html[pos..];
        if rest.starts_with("<!--") {
            st.push_text(&html[text_start..pos]);
            pos = rest.find("-->").map_or(html.len(), |e| pos + e + 3);
            text_start = pos;
            continue;
        }
        if rest.starts_with("<!") || rest.starts_with("<?") {
            st.push_text(&html[text_start..pos]);
            pos = tag_end(html, pos);
            text_start = pos;
            continue;
        }
        let closing = rest.starts_with("</");
        let name_from = pos + if closing { 2 } else { 1 };
        let name_len = bytes[name_from..]
            .iter()
            .take_while(|b| b.is_ascii_alphanumeric())
            .count();
        if name_len == 0 || !bytes[name_from].is_ascii_alphabetic() {
            // A stray '<' is ordinary text.
            pos += 1;
            continue;
        }
        st.push_text(&html[text_start..pos]);
        let name = html[name_from..name_from + name_len].to_ascii_lowercase();
        let after = tag_end(html, name_from + name_len);

        if !closing && name == "title" {
            let end = find_end_tag(html, after, "title").unwrap_or(html.len());
            if st.title.is_none() {
                let decoded = html_escape::decode_html_entities(&html[after..end]);
                st.title = Some(decoded.split_whitespace().collect::<Vec<_>>().join(" "));
            }
            pos = if end < html.len() { tag_end(html, end) } else { end };
            text_start = pos;
            continue;
        }
        if !closing && HIDDEN_TAGS.contains(&name.as_str()) {
            let end = find_end_tag(html, after, &name).unwrap_or(html.len());
            pos = if end < html.len() { tag_end(html, end) } else { end };
            text_start = pos;
            continue;
        }

        match (name.as_str(), closing) {
            ("head", false) => st.in_head = true,
            ("head", true) => st.in_head = false,
            ("body", false) => {
                st.in_head = false;
                st.flush();
            }
            ("a", false) => st.link_depth += 1,
            ("a", true) => st.link_depth = st.link_depth.saturating_sub(1),
            ("br", _) | ("img", _) | ("wbr", _) => st.buf.push(' '),
            (n, _) if BLOCK_TAGS.contains(&n) => st.flush(),
            _ => {}
        }
        pos = after;
        text_start = pos;
    }
    st.push_text(&html[text_start..]);
    st.flush();
    (st.title.unwrap_or_default(), st.blocks)
}

/// Extract `(title, body)` from raw HTML at the given operating point.
pub fn extract_text(html: &str, setting: Setting) -> (String, String) {
    extract_text_with(html, setting, &ExtractorConfig::default())
}

pub fn extract_text_with(html: &str, setting: Setting, cfg: &ExtractorConfig) -> (String, String) {
    let (title, blocks) = scan(html);
    let body = blocks
        .iter()
        .filter(|b| setting == Setting::Relaxed || b.passes(cfg))
        .map(|b| b.text.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    (title, body)
}
