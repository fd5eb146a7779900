//! Rendering of command results as JSON, CSV or an aligned text table.

use std::fmt;
use std::str::FromStr;

use drilldown_core::retrieval::DocRanking;
use drilldown_core::scimap::{BookPlacement, CrosswalkTable, PlacementStatus};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::service::{TopicQueryResult, TopicWords, VolumeRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Table => "table",
        })
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "table" => Ok(Self::Table),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Rows of a listing; the header order is the column order in every format.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Invalid(e.to_string());
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &mut dyn Iterator<Item = &str>| {
            let mut parts = Vec::new();
            for (cell, w) in cells.zip(&widths) {
                parts.push(format!("{cell:<w$}"));
            }
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut self.headers.iter().copied());
        for row in &self.rows {
            line(&mut row.iter().map(String::as_str));
        }
        out
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// JSON of `value`, or the listing as CSV/table.
pub fn render<T: Serialize + ?Sized>(
    value: &T,
    table: impl FnOnce() -> Table,
    format: Format,
) -> Result<String> {
    match format {
        Format::Json => Ok(to_json(value)),
        Format::Csv => table().to_csv(),
        Format::Table => Ok(table().to_text()),
    }
}

pub fn ranking_table(ranking: &DocRanking) -> Table {
    let mut t = Table::new(&["rank", "item_id", "label", "distance"]);
    for (i, e) in ranking.entries.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            e.doc_id.clone(),
            e.label.clone(),
            e.distance.to_string(),
        ]);
    }
    t
}

pub fn topics_table(topics: &[TopicWords]) -> Table {
    let mut t = Table::new(&["topic", "words"]);
    for row in topics {
        let words: Vec<&str> = row.words.iter().map(|w| w.word.as_str()).collect();
        t.push(vec![row.topic.to_string(), words.join(", ")]);
    }
    t
}

pub fn topic_query_table(result: &TopicQueryResult) -> Table {
    let mut t = Table::new(&["rank", "topic", "score", "words"]);
    for (i, hit) in result.topics.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            hit.topic.to_string(),
            hit.score.to_string(),
            hit.top_words.join(", "),
        ]);
    }
    t
}

pub fn volumes_table(rows: &[VolumeRow]) -> Table {
    let mut t = Table::new(&["rank", "volume_id", "title", "pages", "best_distance"]);
    for r in rows {
        t.push(vec![
            r.rank.to_string(),
            r.volume_id.clone(),
            r.title.clone(),
            r.pages.to_string(),
            r.best_distance.to_string(),
        ]);
    }
    t
}

pub fn placements_table(placements: &[BookPlacement]) -> Table {
    let mut t = Table::new(&["volume_id", "status", "x", "y", "top_sub_id", "top_weight"]);
    for p in placements {
        let top = p
            .posterior
            .iter()
            .fold(None::<&(u32, f64)>, |acc, e| match acc {
                Some(b) if b.1 >= e.1 => Some(b),
                _ => Some(e),
            });
        let (x, y) = p
            .position
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .unwrap_or_default();
        t.push(vec![
            p.volume_id.clone(),
            match p.status {
                PlacementStatus::Placed => "placed",
                PlacementStatus::Uncatalogued => "uncatalogued",
            }
            .to_owned(),
            x,
            y,
            top.map(|e| e.0.to_string()).unwrap_or_default(),
            top.map(|e| e.1.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

pub fn crosswalk_table(table: &CrosswalkTable) -> Table {
    let mut t = Table::new(&["sub_id", "key", "level", "journals"]);
    for (sub, tally) in &table.subs {
        for (letters, n) in &tally.by_letters {
            t.push(vec![
                sub.to_string(),
                letters.clone(),
                "full".into(),
                n.to_string(),
            ]);
        }
        for (c, n) in &tally.by_first_letter {
            t.push(vec![
                sub.to_string(),
                c.to_string(),
                "first".into(),
                n.to_string(),
            ]);
        }
    }
    t
}
