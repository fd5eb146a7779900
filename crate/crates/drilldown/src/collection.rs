//! Reading a collection directory of OCR volumes.
//!
//! ```text
//! collection/
//!   <any dir name>/
//!     metadata.json      {"volume_id", "title", "year", "call_number"}
//!     page-0000.txt
//!     page-0001.txt
//!     ...
//! ```
//!
//! Volume directories are visited in name order; page files are ordered by
//! the index in their name, which becomes the page index.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use drilldown_core::{PageText, Stoplist, Volume};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeMetadata {
    pub volume_id: String,
    pub title: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub call_number: Option<String>,
}

fn page_index(name: &str) -> Option<u32> {
    name.strip_prefix("page-")?
        .strip_suffix(".txt")?
        .parse()
        .ok()
}

pub fn read_volume(dir: &Path) -> Result<Volume> {
    let meta_path = dir.join("metadata.json");
    let raw = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: VolumeMetadata =
        serde_json::from_str(&raw).map_err(|e| Error::json(&meta_path, e))?;

    let mut pages = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(index) = name.to_str().and_then(page_index) else {
            continue;
        };
        let path = entry.path();
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let lines = text.lines().map(str::to_owned).collect::<Vec<_>>();
        if pages
            .insert(
                index,
                PageText {
                    page_index: index,
                    lines,
                },
            )
            .is_some()
        {
            return Err(Error::Collection(format!(
                "{}: page {index} appears twice",
                dir.display()
            )));
        }
    }

    Ok(Volume {
        volume_id: meta.volume_id,
        title: meta.title,
        year: meta.year,
        call_number: meta.call_number.filter(|c| !c.trim().is_empty()),
        pages: pages.into_values().collect(),
    })
}

/// Reads every volume directory under `dir`.
pub fn read_collection(dir: &Path) -> Result<Vec<Volume>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry
            .file_type()
            .map_err(|e| Error::io(entry.path(), e))?
            .is_dir()
        {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    let volumes = dirs
        .iter()
        .map(|d| read_volume(d))
        .collect::<Result<Vec<_>>>()?;
    if volumes.is_empty() {
        return Err(Error::Collection(format!(
            "{} contains no volumes",
            dir.display()
        )));
    }
    let mut ids = HashSet::new();
    for v in &volumes {
        if !ids.insert(v.volume_id.as_str()) {
            return Err(Error::Collection(format!(
                "duplicate volume_id {}",
                v.volume_id
            )));
        }
    }
    Ok(volumes)
}

/// Writes volumes in the collection layout; used for fixtures and exports.
pub fn write_collection(dir: &Path, volumes: &[Volume]) -> Result<()> {
    for (i, v) in volumes.iter().enumerate() {
        let vdir = dir.join(format!("vol-{i:04}"));
        fs::create_dir_all(&vdir).map_err(|e| Error::io(&vdir, e))?;
        let meta = VolumeMetadata {
            volume_id: v.volume_id.clone(),
            title: v.title.clone(),
            year: v.year,
            call_number: v.call_number.clone(),
        };
        let path = vdir.join("metadata.json");
        let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::json(&path, e))?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        for page in &v.pages {
            let path = vdir.join(format!("page-{:04}.txt", page.page_index));
            let mut text = page.lines.join("\n");
            text.push('\n');
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Stoplist file: UTF-8, one word per line.
pub fn read_stoplist(path: &Path) -> Result<Stoplist> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(Stoplist::parse(&text))
}
