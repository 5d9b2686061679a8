use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub(crate) const VERSION: u32 = 1;

/// Write `magic`, a little-endian version word, then the bincode payload.
pub(crate) fn save<T: Serialize>(path: &Path, magic: &[u8; 8], value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(magic).map_err(|e| Error::io(path, e))?;
    w.write_all(&VERSION.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    bincode::serialize_into(&mut w, value).map_err(|e| Error::Cache {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn load<T: DeserializeOwned>(path: &Path, magic: &[u8; 8]) -> Result<T> {
    let bad = |message: String| Error::Cache {
        path: path.to_owned(),
        message,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut head = [0u8; 12];
    r.read_exact(&mut head).map_err(|_| bad("truncated header".into()))?;
    if &head[..8] != magic {
        return Err(bad(format!("expected magic {:?}", String::from_utf8_lossy(magic))));
    }
    let version = u32::from_le_bytes(head[8..].try_into().expect("four bytes"));
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    bincode::deserialize_from(r).map_err(|e| bad(e.to_string()))
}
