//! One JSON document per fingerprint; writes go through a single lock.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::warn;

use super::{IntegralTable, Strategy, SCHEMA_VERSION};
use crate::error::Result;

static WRITER: Mutex<()> = Mutex::new(());

pub fn path_for(dir: &Path, fingerprint: &str) -> PathBuf {
    dir.join(format!("{fingerprint}.json"))
}

/// Cached table truncated to `m_max`, if one exists and is usable.
pub fn load(dir: &Path, fingerprint: &str, m_max: usize, s: &Strategy) -> Option<IntegralTable> {
    let path = path_for(dir, fingerprint);
    let text = fs::read_to_string(&path).ok()?;
    let table: IntegralTable = match serde_json::from_str(&text) {
        Ok(t) => t,
        Err(e) => {
            warn!("cache entry {} is corrupt ({e}); rebuilding", path.display());
            return None;
        }
    };
    let consistent = table.schema_version == SCHEMA_VERSION
        && table.fingerprint == fingerprint
        && table.entries.len() == table.m_max + 1
        && table.entries.iter().enumerate().all(|(i, e)| e.m == i);
    if !consistent {
        warn!("cache entry {} is inconsistent; rebuilding", path.display());
        return None;
    }
    if table.m_max < m_max || &table.strategy != s {
        return None;
    }
    Some(table.truncated(m_max))
}

pub fn store(dir: &Path, table: &IntegralTable) -> Result<()> {
    let _guard = WRITER.lock().unwrap_or_else(|e| e.into_inner());
    fs::create_dir_all(dir)?;
    let path = path_for(dir, &table.fingerprint);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(table)?)?;
    fs::rename(&tmp, &path)?;
    Ok(())
}
