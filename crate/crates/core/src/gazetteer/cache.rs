//! Line-delimited gazetteer cache: a magic header line, a JSON metadata
//! line, then one JSON record per line in id order. The trie is rebuilt on
//! load.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Gazetteer, GazetteerRecord};
use crate::{Error, Result};

pub const CACHE_MAGIC: &str = "GEOTAG-GAZETTEER v1";

#[derive(Serialize, Deserialize)]
struct Meta {
    records: usize,
    warnings: usize,
}

pub fn save_cache(gaz: &Gazetteer, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{CACHE_MAGIC}").map_err(io)?;
    serde_json::to_writer(
        &mut w,
        &Meta {
            records: gaz.len(),
            warnings: gaz.warnings(),
        },
    )?;
    writeln!(w).map_err(io)?;
    for rec in gaz.records() {
        serde_json::to_writer(&mut w, rec)?;
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_cache(path: &Path) -> Result<Gazetteer> {
    let bad = |message: String| Error::Cache {
        path: path.to_owned(),
        message,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose().map_err(|e| Error::io(path, e))?;
    if header.as_deref() != Some(CACHE_MAGIC) {
        return Err(bad(format!("missing header {CACHE_MAGIC:?}")));
    }
    let meta_line = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| bad("missing metadata line".into()))?;
    let meta: Meta = serde_json::from_str(&meta_line).map_err(|e| bad(e.to_string()))?;
    let mut records = Vec::with_capacity(meta.records);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let rec: GazetteerRecord = serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", i + 3)))?;
        records.push(rec);
    }
    if records.len() != meta.records {
        return Err(bad(format!("expected {} records, found {}", meta.records, records.len())));
    }
    Gazetteer::from_records(records, meta.warnings)
}
