use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

const ENGLISH: &str = include_str!("../data/stoplist_en.txt");

/// A set of lowercase words excluded from every vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    /// The bundled 153-word English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH)
    }

    pub fn empty() -> Self {
        Self(BTreeSet::new())
    }

    /// One word per line; blank lines are skipped and words are lowercased.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(|w| w.to_lowercase())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stoplist {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|w| w.as_ref().to_string()).collect())
    }
}
