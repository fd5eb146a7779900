//! OCR text cleanup: running header/footer removal, hyphenation repair,
//! tokenization and sentence splitting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::stoplist::Stoplist;

/// One scanned page: its archival index and its raw OCR lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageText {
    pub page_index: u32,
    pub lines: Vec<String>,
}

impl PageText {
    pub fn new<S: Into<String>>(page_index: u32, lines: impl IntoIterator<Item = S>) -> Self {
        Self {
            page_index,
            lines: lines.into_iter().map(Into::into).collect(),
        }
    }

    /// Lines joined with `\n`.
    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

/// A source volume with its pages in archival order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Volume {
    pub volume_id: String,
    pub title: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub call_number: Option<String>,
    pub pages: Vec<PageText>,
}

impl Volume {
    /// True when page indices are strictly increasing.
    pub fn pages_ordered(&self) -> bool {
        self.pages
            .windows(2)
            .all(|w| w[0].page_index < w[1].page_index)
    }
}

/// Thresholds for running header/footer detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeaderConfig {
    /// Volumes with fewer pages are never stripped.
    pub min_pages: usize,
    /// A first/last line is a running header/footer when its normalized form
    /// is the first/last line of at least this fraction of pages.
    pub min_fraction: f64,
}

impl Default for HeaderConfig {
    fn default() -> Self {
        Self {
            min_pages: 5,
            min_fraction: 0.3,
        }
    }
}

/// Full cleanup applied at ingest: header/footer stripping, then
/// hyphenation repair across lines and page breaks.
pub fn clean_volume(volume: &Volume, headers: &HeaderConfig) -> Volume {
    let mut out = strip_running_headers(volume, headers);
    out.pages = repair_volume_hyphenation(&out.pages);
    out
}

/// Normalized key used to compare header/footer candidates: lowercased,
/// digits removed, whitespace collapsed.
pub fn normalize_header(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    for word in line.split_whitespace() {
        let mut piece = String::new();
        for c in word.chars().filter(|c| !c.is_numeric()) {
            piece.extend(c.to_lowercase());
        }
        if piece.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&piece);
    }
    out
}

fn first_non_blank(lines: &[String]) -> Option<usize> {
    lines.iter().position(|l| !l.trim().is_empty())
}

fn last_non_blank(lines: &[String]) -> Option<usize> {
    lines.iter().rposition(|l| !l.trim().is_empty())
}

/// Removes running headers and footers.
///
/// Only the first and last non-blank line of each page are candidates. A
/// candidate is dropped when its normalized form occurs in the same position
/// on at least `min_fraction` of the volume's pages.
pub fn strip_running_headers(volume: &Volume, config: &HeaderConfig) -> Volume {
    let n = volume.pages.len();
    if n < config.min_pages || n == 0 {
        return volume.clone();
    }

    let mut first_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut last_counts: BTreeMap<String, usize> = BTreeMap::new();
    for page in &volume.pages {
        if let Some(i) = first_non_blank(&page.lines) {
            *first_counts
                .entry(normalize_header(&page.lines[i]))
                .or_default() += 1;
        }
        if let Some(i) = last_non_blank(&page.lines) {
            *last_counts
                .entry(normalize_header(&page.lines[i]))
                .or_default() += 1;
        }
    }

    let needed = config.min_fraction * n as f64;
    let repeated = |counts: &BTreeMap<String, usize>, line: &str| {
        counts
            .get(&normalize_header(line))
            .is_some_and(|&c| c as f64 >= needed)
    };

    let mut out = volume.clone();
    for page in &mut out.pages {
        let first = first_non_blank(&page.lines);
        let last = last_non_blank(&page.lines);
        let drop_first = first.filter(|&i| repeated(&first_counts, &page.lines[i]));
        let drop_last = last.filter(|&i| repeated(&last_counts, &page.lines[i]));
        let lines = core::mem::take(&mut page.lines);
        page.lines = lines
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != drop_first && Some(*i) != drop_last)
            .map(|(_, l)| l)
            .collect();
    }
    out
}

/// The line without its trailing hyphen, when it ends in a word-final `-`.
fn hyphen_stem(line: &str) -> Option<&str> {
    let trimmed = line.trim_end();
    let stem = trimmed.strip_suffix('-')?;
    stem.chars()
        .next_back()
        .filter(|c| c.is_alphabetic())
        .map(|_| stem)
}

fn starts_lowercase(line: &str) -> bool {
    line.trim_start()
        .chars()
        .next()
        .is_some_and(char::is_lowercase)
}

/// Joins words hyphenated across line breaks within one run of lines.
pub fn repair_hyphenation(lines: &[String]) -> Vec<String> {
    let page = PageText {
        page_index: 0,
        lines: lines.to_vec(),
    };
    repair_volume_hyphenation(core::slice::from_ref(&page))
        .pop()
        .map(|p| p.lines)
        .unwrap_or_default()
}

/// Joins words hyphenated across line breaks, including the break between
/// one page's last line and the next page's first non-blank line.
///
/// A line ending in a letter followed by `-` absorbs the next non-blank line
/// when that line starts with a lowercase letter; the hyphen is removed and
/// the absorbed line disappears from its page. Blank lines in between stay.
pub fn repair_volume_hyphenation(pages: &[PageText]) -> Vec<PageText> {
    let mut slots: Vec<Vec<Option<String>>> = pages
        .iter()
        .map(|p| p.lines.iter().cloned().map(Some).collect())
        .collect();
    let coords: Vec<(usize, usize)> = pages
        .iter()
        .enumerate()
        .flat_map(|(p, page)| (0..page.lines.len()).map(move |l| (p, l)))
        .collect();

    for (ci, &(p, l)) in coords.iter().enumerate() {
        while let Some(current) = slots[p][l].as_deref() {
            let Some(stem) = hyphen_stem(current) else {
                break;
            };
            let next = coords[ci + 1..].iter().copied().find(|&(p2, l2)| {
                slots[p2][l2]
                    .as_deref()
                    .is_some_and(|s| !s.trim().is_empty())
            });
            let Some((p2, l2)) = next else {
                break;
            };
            let following = slots[p2][l2].as_deref().unwrap_or_default();
            if !starts_lowercase(following) {
                break;
            }
            let mut joined = String::from(stem);
            joined.push_str(following.trim_start());
            slots[p2][l2] = None;
            slots[p][l] = Some(joined);
        }
    }

    pages
        .iter()
        .zip(slots)
        .map(|(page, lines)| PageText {
            page_index: page.page_index,
            lines: lines.into_iter().flatten().collect(),
        })
        .collect()
}

/// Lowercases `text` and returns its maximal alphabetic runs, minus stopwords.
pub fn tokenize(text: &str, stoplist: &Stoplist) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            let word = core::mem::take(current);
            if !stoplist.contains(&word) {
                tokens.push(word);
            }
        }
    };
    for c in text.chars() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Splits text into sentences.
///
/// A sentence ends at `.`, `?` or `!` when followed by whitespace and then an
/// uppercase letter, or at the end of the text. Abbreviations such as "Mr."
/// therefore split. Whitespace inside each sentence is collapsed to single
/// spaces.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j].1.is_uppercase() {
                let sentence = collapse_whitespace(&text[start..pos + c.len_utf8()]);
                if !sentence.is_empty() {
                    sentences.push(sentence);
                }
                start = chars[j].0;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    let tail = collapse_whitespace(&text[start..]);
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences
}
