//! Append-only JSON-lines cache of genus 1 Frobenius traces, keyed by
//! `(family, t mod p, p)`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curves::FrobData;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CacheLine {
    family_id: String,
    t: Vec<u64>,
    p: u64,
    /// `None` marks a singular fibre.
    data: Option<FrobData>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub loaded: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub conflicts: usize,
    pub appended: usize,
}

#[derive(Debug)]
pub struct FrobeniusCache {
    path: Option<PathBuf>,
    family_id: String,
    entries: HashMap<(u64, u64), Option<i64>>,
    pending: BTreeMap<(u64, u64), Option<i64>>,
    pub stats: CacheStats,
}

impl FrobeniusCache {
    pub fn in_memory(family_id: &str) -> Self {
        FrobeniusCache {
            path: None,
            family_id: family_id.to_string(),
            entries: HashMap::new(),
            pending: BTreeMap::new(),
            stats: CacheStats::default(),
        }
    }

    /// Replay `path` (if it exists), keeping the first record per key and
    /// skipping malformed lines.
    pub fn open(path: &Path, family_id: &str) -> Result<Self> {
        let mut cache = Self::in_memory(family_id);
        cache.path = Some(path.to_path_buf());
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(Error::io(path, e)),
        };
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CacheLine = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(_) => {
                    cache.stats.malformed += 1;
                    continue;
                }
            };
            if rec.family_id != family_id {
                continue;
            }
            let ap = match rec.data {
                None => None,
                Some(FrobData::Genus1 { ap }) => Some(ap),
                Some(FrobData::Genus2 { .. }) => {
                    cache.stats.malformed += 1;
                    continue;
                }
            };
            let [t] = rec.t[..] else {
                cache.stats.malformed += 1;
                continue;
            };
            match cache.entries.get(&(rec.p, t)) {
                Some(prev) if *prev != ap => cache.stats.conflicts += 1,
                Some(_) => cache.stats.duplicates += 1,
                None => {
                    cache.entries.insert((rec.p, t), ap);
                    cache.stats.loaded += 1;
                }
            }
        }
        if cache.stats.malformed > 0 {
            log::warn!("{}: skipped {} malformed cache lines", path.display(), cache.stats.malformed);
        }
        if cache.stats.conflicts > 0 {
            log::warn!("{}: {} conflicting cache lines ignored", path.display(), cache.stats.conflicts);
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Some(entry)` if cached; the entry is `None` for a singular fibre.
    pub fn get(&self, p: u64, t: u64) -> Option<Option<i64>> {
        self.entries.get(&(p, t)).copied()
    }

    pub fn insert(&mut self, p: u64, t: u64, ap: Option<i64>) {
        if self.entries.insert((p, t), ap).is_none() {
            self.pending.insert((p, t), ap);
        }
    }

    /// Append pending records in `(p, t)` order. Single writer.
    pub fn flush(&mut self) -> Result<()> {
        let Some(path) = &self.path else {
            self.pending.clear();
            return Ok(());
        };
        if self.pending.is_empty() {
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (&(p, t), &ap) in &self.pending {
            let line = CacheLine {
                family_id: self.family_id.clone(),
                t: vec![t],
                p,
                data: ap.map(|ap| FrobData::Genus1 { ap }),
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::io(path, e))?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        self.stats.appended += self.pending.len();
        self.pending.clear();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_dedups_and_skips_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let mut c = FrobeniusCache::open(&path, "fam").unwrap();
        c.insert(7, 3, Some(-2));
        c.insert(7, 0, None);
        c.flush().unwrap();
        let mut c = FrobeniusCache::open(&path, "fam").unwrap();
        c.insert(7, 3, Some(-2));
        c.insert(11, 1, Some(4));
        c.flush().unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{not json\n");
        text.push_str(r#"{"family_id":"fam","t":[3],"p":7,"data":{"genus1":{"ap":-2}}}"#);
        text.push('\n');
        text.push_str(r#"{"family_id":"other","t":[1],"p":7,"data":null}"#);
        text.push('\n');
        std::fs::write(&path, text).unwrap();
        let c = FrobeniusCache::open(&path, "fam").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.get(7, 3), Some(Some(-2)));
        assert_eq!(c.get(7, 0), Some(None));
        assert_eq!(c.get(7, 1), None);
        assert_eq!(c.stats.malformed, 1);
        assert_eq!(c.stats.duplicates, 1);
    }
}
