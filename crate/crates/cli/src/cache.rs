//! On-disk cache of speed tables, keyed by property fingerprint.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use shatterlab::hereditary::{HereditaryProperty, SpeedEntry, SpeedTable};

pub const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: u32,
    pub language_fingerprint: String,
    pub property_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub n: usize,
    pub count: String,
    pub wall_secs: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheFile {
    pub header: CacheHeader,
    pub property: String,
    pub records: Vec<CacheRecord>,
}

fn header_for(prop: &HereditaryProperty) -> CacheHeader {
    CacheHeader {
        format: FORMAT,
        language_fingerprint: prop.language().fingerprint(),
        property_fingerprint: prop.fingerprint(),
    }
}

pub fn cache_path(dir: &Path, prop: &HereditaryProperty) -> PathBuf {
    dir.join(format!("speed-{}.json", &prop.fingerprint()[..16]))
}

impl CacheFile {
    pub fn from_table(prop: &HereditaryProperty, table: &SpeedTable) -> Self {
        CacheFile {
            header: header_for(prop),
            property: table.property.clone(),
            records: table
                .entries
                .iter()
                .map(|e| CacheRecord {
                    n: e.n,
                    count: e.count.to_string(),
                    wall_secs: e.wall_secs,
                    complete: true,
                })
                .collect(),
        }
    }

    /// The cached table, or `None` if the file belongs to another property,
    /// another format, or its records are not `0, 1, 2, ...`.
    pub fn to_table(&self, prop: &HereditaryProperty) -> Option<SpeedTable> {
        if self.header != header_for(prop) {
            return None;
        }
        let mut entries = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            if r.n != i || !r.complete {
                break;
            }
            entries.push(SpeedEntry {
                n: r.n,
                count: r.count.parse().ok()?,
                wall_secs: r.wall_secs,
            });
        }
        Some(SpeedTable {
            property: self.property.clone(),
            entries,
        })
    }
}

pub fn load(dir: &Path, prop: &HereditaryProperty) -> Option<SpeedTable> {
    let text = fs::read_to_string(cache_path(dir, prop)).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    file.to_table(prop)
}

/// Writes through a temporary file so readers never see a partial cache.
pub fn store(dir: &Path, prop: &HereditaryProperty, table: &SpeedTable) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    let path = cache_path(dir, prop);
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string_pretty(&CacheFile::from_table(prop, table))?;
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use shatterlab::hereditary::speed_table;
    use shatterlab::Limits;

    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = HereditaryProperty::graphs();
        let t = speed_table(&p, 4, &Limits::default()).unwrap();
        store(dir.path(), &p, &t).unwrap();
        assert_eq!(load(dir.path(), &p).unwrap(), t);
        // Another property does not read this cache.
        let q = HereditaryProperty::triangle_free();
        assert!(load(dir.path(), &q).is_none());
        let file = CacheFile::from_table(&p, &t);
        assert!(file.to_table(&q).is_none());
    }
}
