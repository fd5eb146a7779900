//! Call-number crosswalk onto a journal-based science basemap.
//!
//! Journals on the basemap carry Library of Congress call numbers. Tallying
//! their class letters per sub-discipline gives a table against which a
//! book's call number is scored at two levels: full class letters and first
//! letter only.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScimapError {
    #[error("unparseable call number {0:?}")]
    UnparseableCallNumber(String),
    #[error("basemap has no journals")]
    EmptyBasemap,
    #[error("journal {journal:?} references unknown sub-discipline {sub_id}")]
    UnknownSubdiscipline { journal: String, sub_id: u32 },
}

/// Parsed Library of Congress call number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallNumber {
    /// One to three uppercase letters, e.g. `QL`.
    pub class_letters: String,
    pub class_number: Option<f64>,
    pub raw: String,
}

impl CallNumber {
    pub fn first_letter(&self) -> char {
        self.class_letters.chars().next().unwrap_or('?')
    }
}

/// Extracts the leading class letters and the class number that follows;
/// cutters and dates after the number are ignored.
pub fn parse_call_number(raw: &str) -> Result<CallNumber, ScimapError> {
    let s = raw.trim();
    let letters: String = s.chars().take_while(|c| c.is_ascii_uppercase()).collect();
    let after = &s[letters.len()..];
    if letters.is_empty()
        || letters.len() > 3
        || after.starts_with(|c: char| c.is_ascii_alphabetic())
    {
        return Err(ScimapError::UnparseableCallNumber(raw.to_string()));
    }
    let rest = after.trim_start();
    let mut end = rest.bytes().take_while(u8::is_ascii_digit).count();
    if end > 0 && rest[end..].starts_with('.') {
        let frac = rest[end + 1..]
            .bytes()
            .take_while(u8::is_ascii_digit)
            .count();
        if frac > 0 {
            end += 1 + frac;
        }
    }
    let class_number = (end > 0).then(|| rest[..end].parse::<f64>().ok()).flatten();
    Ok(CallNumber {
        class_letters: letters,
        class_number,
        raw: raw.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subdiscipline {
    pub sub_id: u32,
    pub name: String,
    pub discipline_id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discipline {
    pub discipline_id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Journal {
    pub journal_name: String,
    pub call_number: String,
    pub sub_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basemap {
    pub subdisciplines: Vec<Subdiscipline>,
    pub disciplines: Vec<Discipline>,
    pub journals: Vec<Journal>,
}

impl Basemap {
    /// Every journal must reference an existing sub-discipline.
    pub fn validate(&self) -> Result<(), ScimapError> {
        for j in &self.journals {
            if self.subdiscipline(j.sub_id).is_none() {
                return Err(ScimapError::UnknownSubdiscipline {
                    journal: j.journal_name.clone(),
                    sub_id: j.sub_id,
                });
            }
        }
        Ok(())
    }

    pub fn subdiscipline(&self, sub_id: u32) -> Option<&Subdiscipline> {
        self.subdisciplines.iter().find(|s| s.sub_id == sub_id)
    }
}

/// Journal counts of one sub-discipline at both match levels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubTally {
    pub by_letters: BTreeMap<String, u32>,
    pub by_first_letter: BTreeMap<char, u32>,
}

impl SubTally {
    pub fn journal_count(&self) -> u32 {
        self.by_letters.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkTable {
    pub subs: BTreeMap<u32, SubTally>,
    /// Journals skipped because their call number did not parse.
    pub skipped: Vec<String>,
}

/// Tallies journal call numbers per sub-discipline. Duplicate journal rows
/// count once per row.
pub fn build_crosswalk(basemap: &Basemap) -> Result<CrosswalkTable, ScimapError> {
    if basemap.journals.is_empty() {
        return Err(ScimapError::EmptyBasemap);
    }
    basemap.validate()?;
    let mut subs: BTreeMap<u32, SubTally> = BTreeMap::new();
    let mut skipped = Vec::new();
    for j in &basemap.journals {
        match parse_call_number(&j.call_number) {
            Ok(cn) => {
                let tally = subs.entry(j.sub_id).or_default();
                *tally
                    .by_letters
                    .entry(cn.class_letters.clone())
                    .or_default() += 1;
                *tally.by_first_letter.entry(cn.first_letter()).or_default() += 1;
            }
            Err(_) => skipped.push(j.journal_name.clone()),
        }
    }
    Ok(CrosswalkTable { subs, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementMode {
    /// Posterior proportional to match scores; position is the weighted mean.
    Weighted,
    /// All weight on the best-scoring sub-discipline (lowest id on ties).
    Argmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub full_letters_weight: f64,
    pub first_letter_weight: f64,
    pub mode: PlacementMode,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            full_letters_weight: 4.0,
            first_letter_weight: 1.0,
            mode: PlacementMode::Weighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementStatus {
    Placed,
    Uncatalogued,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookPlacement {
    pub volume_id: String,
    pub status: PlacementStatus,
    /// `(sub_id, weight)` in ascending sub_id order; empty when uncatalogued.
    pub posterior: Vec<(u32, f64)>,
    pub position: Option<(f64, f64)>,
}

impl BookPlacement {
    fn uncatalogued(volume_id: &str) -> Self {
        Self {
            volume_id: volume_id.to_string(),
            status: PlacementStatus::Uncatalogued,
            posterior: Vec::new(),
            position: None,
        }
    }
}

/// Per-sub-discipline match scores for one call number, ascending sub_id.
pub fn match_scores(
    call_number: &CallNumber,
    crosswalk: &CrosswalkTable,
    config: &PlacementConfig,
) -> Vec<(u32, f64)> {
    let first = call_number.first_letter();
    crosswalk
        .subs
        .iter()
        .map(|(&sub, tally)| {
            let full = tally
                .by_letters
                .get(&call_number.class_letters)
                .copied()
                .unwrap_or(0);
            let initial = tally.by_first_letter.get(&first).copied().unwrap_or(0);
            (
                sub,
                config.full_letters_weight * f64::from(full)
                    + config.first_letter_weight * f64::from(initial),
            )
        })
        .filter(|&(_, s)| s > 0.0)
        .collect()
}

/// Places a book on the basemap from its call number.
pub fn place_book(
    volume_id: &str,
    call_number: Option<&CallNumber>,
    crosswalk: &CrosswalkTable,
    basemap: &Basemap,
    config: &PlacementConfig,
) -> BookPlacement {
    let Some(cn) = call_number else {
        return BookPlacement::uncatalogued(volume_id);
    };
    let scores: Vec<(u32, f64, &Subdiscipline)> = match_scores(cn, crosswalk, config)
        .into_iter()
        .filter_map(|(sub, s)| basemap.subdiscipline(sub).map(|sd| (sub, s, sd)))
        .collect();
    let total: f64 = scores.iter().map(|&(_, s, _)| s).sum();
    if scores.is_empty() || total <= 0.0 {
        return BookPlacement::uncatalogued(volume_id);
    }

    let posterior: Vec<(u32, f64, &Subdiscipline)> = match config.mode {
        PlacementMode::Weighted => scores
            .iter()
            .map(|&(sub, s, sd)| (sub, s / total, sd))
            .collect(),
        PlacementMode::Argmax => {
            let best = scores
                .iter()
                .fold(None::<&(u32, f64, &Subdiscipline)>, |acc, cand| match acc {
                    Some(b) if b.1 >= cand.1 => Some(b),
                    _ => Some(cand),
                })
                .map(|&(sub, _, sd)| (sub, 1.0, sd));
            best.into_iter().collect()
        }
    };
    let x = posterior.iter().map(|&(_, w, sd)| w * sd.x).sum();
    let y = posterior.iter().map(|&(_, w, sd)| w * sd.y).sum();
    BookPlacement {
        volume_id: volume_id.to_string(),
        status: PlacementStatus::Placed,
        posterior: posterior.into_iter().map(|(sub, w, _)| (sub, w)).collect(),
        position: Some((x, y)),
    }
}
