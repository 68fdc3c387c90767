//! On-disk cache of generated exceptional classes.
//!
//! The file is JSON with a schema name and version followed by the twist-class
//! representatives in canonical order, one `[rank, c1a, c1b, ch2]` record each.
//! Since the representatives do not depend on a slope window, files are keyed by
//! the rank bound alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exceptional::{exceptional_classes, ExceptionalBundle};

pub const SCHEMA: &str = "effcone-exceptional-classes";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheFile {
    schema: String,
    version: u32,
    rank_bound: i64,
    classes: Vec<[i64; 4]>,
}

/// Path of the cache file for a rank bound.
pub fn cache_path(dir: &Path, rank_bound: i64) -> PathBuf {
    dir.join(format!("classes-v{VERSION}-r{rank_bound}.json"))
}

/// Serializes classes in the cache format.
pub fn encode(rank_bound: i64, classes: &[ExceptionalBundle]) -> String {
    let mut sorted = classes.to_vec();
    sorted.sort();
    let file = CacheFile {
        schema: SCHEMA.into(),
        version: VERSION,
        rank_bound,
        classes: sorted
            .iter()
            .map(|e| [e.rank, e.c1a, e.c1b, e.ch2])
            .collect(),
    };
    serde_json::to_string(&file).expect("cache records serialize")
}

/// Parses the cache format, checking the header and every record.
pub fn decode(text: &str, rank_bound: i64) -> Result<Vec<ExceptionalBundle>> {
    let file: CacheFile =
        serde_json::from_str(text).map_err(|e| Error::Io(format!("malformed cache: {e}")))?;
    if file.schema != SCHEMA || file.version != VERSION {
        return Err(Error::Io(format!(
            "unsupported cache schema {} v{}",
            file.schema, file.version
        )));
    }
    if file.rank_bound != rank_bound {
        return Err(Error::Io(format!(
            "cache is for rank bound {}, not {rank_bound}",
            file.rank_bound
        )));
    }
    let out: Vec<ExceptionalBundle> = file
        .classes
        .iter()
        .map(|r| ExceptionalBundle::from_ints(r[0], r[1], r[2], r[3]))
        .collect();
    for e in &out {
        if !e.satisfies_invariants() || e.rank > rank_bound || e.canonical_class().0 != *e {
            return Err(Error::Io(format!(
                "cache record {e} is not a valid class representative"
            )));
        }
    }
    Ok(out)
}

/// Loads the classes for `rank_bound` from `dir`, generating and storing them on a
/// miss.  With no directory the classes are always generated.  An unreadable or
/// stale file is regenerated and overwritten.
pub fn load_or_generate(
    dir: Option<&Path>,
    rank_bound: i64,
    cap: usize,
) -> Result<Vec<ExceptionalBundle>> {
    let Some(dir) = dir else {
        return exceptional_classes(rank_bound, cap);
    };
    let path = cache_path(dir, rank_bound);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(classes) = decode(&text, rank_bound) {
            if classes.len() <= cap {
                return Ok(classes);
            }
        }
    }
    let classes = exceptional_classes(rank_bound, cap)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    std::fs::write(&path, encode(rank_bound, &classes))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(classes)
}
