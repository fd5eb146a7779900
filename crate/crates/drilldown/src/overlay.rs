//! Basemap input, call-number resolution, and the overlay file consumed by
//! the web map.
//!
//! Basemap JSON:
//!
//! ```json
//! {"subdisciplines": [{"sub_id": 1, "name": "…", "discipline_id": 2, "x": 0.5, "y": 0.1}],
//!  "disciplines":    [{"discipline_id": 2, "name": "…"}],
//!  "journals":       [{"journal_name": "…", "call_number": "QL750", "sub_id": 1}]}
//! ```
//!
//! Overlay JSON, version 1:
//!
//! ```json
//! {"format_version": 1, "basemap": "<basemap reference>",
//!  "overlay": [{"volume_id": "…", "title": "…", "tier": "focus", "x": 1.0, "y": 2.0,
//!               "posterior": [{"sub_id": 1, "weight": 1.0}]}],
//!  "uncatalogued": ["…"]}
//! ```

use std::collections::HashMap;
use std::path::Path;

use drilldown_core::scimap::{parse_call_number, Basemap, BookPlacement, PlacementStatus};
use drilldown_core::Volume;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats;

pub const OVERLAY_FORMAT_VERSION: u64 = 1;

pub fn read_basemap(path: &Path) -> Result<Basemap> {
    let map: Basemap = formats::read_json(path)?;
    map.validate()?;
    Ok(map)
}

/// Source of a volume's call number.
pub trait CallNumberResolver {
    fn resolve(&self, volume: &Volume) -> Option<String>;
}

/// Uses the call number recorded in the volume metadata.
#[derive(Debug, Default, Clone, Copy)]
pub struct MetadataResolver;

impl CallNumberResolver for MetadataResolver {
    fn resolve(&self, volume: &Volume) -> Option<String> {
        volume.call_number.clone()
    }
}

/// Offline lookup table keyed by volume id, falling back to metadata.
/// The file is a JSON object `{"volume_id": "call number", …}`.
#[derive(Debug, Default, Clone)]
pub struct TableResolver {
    pub table: HashMap<String, String>,
}

impl TableResolver {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(Self {
            table: formats::read_json(path)?,
        })
    }
}

impl CallNumberResolver for TableResolver {
    fn resolve(&self, volume: &Volume) -> Option<String> {
        self.table
            .get(&volume.volume_id)
            .cloned()
            .or_else(|| volume.call_number.clone())
    }
}

/// Parses a resolved call number; unparseable numbers count as absent.
pub fn resolved_call_number(
    resolver: &dyn CallNumberResolver,
    volume: &Volume,
) -> Option<drilldown_core::scimap::CallNumber> {
    resolver
        .resolve(volume)
        .and_then(|raw| parse_call_number(&raw).ok())
}

/// Visual emphasis of a volume on the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Base,
    Mid,
    Focus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorWeight {
    pub sub_id: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayEntry {
    pub volume_id: String,
    pub title: String,
    pub tier: Tier,
    pub x: f64,
    pub y: f64,
    pub posterior: Vec<PosteriorWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayFile {
    pub format_version: u64,
    pub basemap: String,
    pub overlay: Vec<OverlayEntry>,
    pub uncatalogued: Vec<String>,
}

/// Builds the overlay from placements; uncatalogued volumes are listed but
/// not drawn. Volumes without a tier entry default to `base`.
pub fn build_overlay(
    basemap_ref: &str,
    placements: &[BookPlacement],
    titles: &HashMap<String, String>,
    tiers: &HashMap<String, Tier>,
) -> OverlayFile {
    let mut overlay = Vec::new();
    let mut uncatalogued = Vec::new();
    for p in placements {
        match (p.status, p.position) {
            (PlacementStatus::Placed, Some((x, y))) => overlay.push(OverlayEntry {
                volume_id: p.volume_id.clone(),
                title: titles.get(&p.volume_id).cloned().unwrap_or_default(),
                tier: tiers.get(&p.volume_id).copied().unwrap_or(Tier::Base),
                x,
                y,
                posterior: p
                    .posterior
                    .iter()
                    .map(|&(sub_id, weight)| PosteriorWeight { sub_id, weight })
                    .collect(),
            }),
            _ => uncatalogued.push(p.volume_id.clone()),
        }
    }
    OverlayFile {
        format_version: OVERLAY_FORMAT_VERSION,
        basemap: basemap_ref.to_owned(),
        overlay,
        uncatalogued,
    }
}

pub fn write_overlay(path: &Path, overlay: &OverlayFile) -> Result<()> {
    formats::write_json(path, overlay)
}

pub fn read_overlay(path: &Path) -> Result<OverlayFile> {
    let file: OverlayFile = formats::read_json(path)?;
    if file.format_version != OVERLAY_FORMAT_VERSION {
        return Err(Error::UnsupportedFormat {
            what: "overlay",
            version: file.format_version,
        });
    }
    Ok(file)
}

/// CSV with columns `volume_id,title,tier,x,y,top_sub_id,top_weight`.
pub fn overlay_to_csv(overlay: &OverlayFile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record([
        "volume_id",
        "title",
        "tier",
        "x",
        "y",
        "top_sub_id",
        "top_weight",
    ])
    .map_err(to_err)?;
    for e in &overlay.overlay {
        let top = e
            .posterior
            .iter()
            .fold(None::<&PosteriorWeight>, |acc, p| match acc {
                Some(b) if b.weight >= p.weight => Some(b),
                _ => Some(p),
            });
        let tier = match e.tier {
            Tier::Base => "base",
            Tier::Mid => "mid",
            Tier::Focus => "focus",
        };
        w.write_record([
            e.volume_id.clone(),
            e.title.clone(),
            tier.to_owned(),
            e.x.to_string(),
            e.y.to_string(),
            top.map(|p| p.sub_id.to_string()).unwrap_or_default(),
            top.map(|p| p.weight.to_string()).unwrap_or_default(),
        ])
        .map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}
