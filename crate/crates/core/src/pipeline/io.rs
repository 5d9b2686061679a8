use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::{Error, Result};

/// One input page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageInput {
    pub page_id: String,
    pub html: String,
}

/// Read a JSON-lines file, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn is_html(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("html" | "htm"))
}

/// Pages from a directory of `.html` files (page id = file stem, in path
/// order) or from a JSON-lines file of `{page_id, html}` objects.
pub fn read_pages(input: &Path) -> Result<Vec<PageInput>> {
    let pages = if input.is_dir() {
        let mut pages = Vec::new();
        for entry in WalkDir::new(input).min_depth(1).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::InvalidInput(format!("{}: {e}", input.display())))?;
            let path = entry.path();
            if !entry.file_type().is_file() || !is_html(path) {
                continue;
            }
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let page_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
            pages.push(PageInput {
                page_id,
                html: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
        pages
    } else {
        read_jsonl(input)?
    };
    let mut seen = BTreeSet::new();
    for p in &pages {
        if !seen.insert(p.page_id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate page id {:?} in {}", p.page_id, input.display())));
        }
    }
    Ok(pages)
}

/// A page id made safe for use as a file name.
pub fn file_stem_for(page_id: &str) -> String {
    let s: String = page_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}
