//! Allocation-only core of the drill-down engine.
//!
//! Everything here is a pure function over in-memory values: OCR text
//! cleanup, tokenization and corpus construction at volume, page or sentence
//! granularity, collapsed Gibbs sampling for LDA, topic and document
//! retrieval, and the call-number crosswalk used to place books on a science
//! basemap. File formats, the on-disk store, the CLI and the HTTP service
//! live in the `drilldown` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod codec;
pub mod corpus;
pub mod drill;
pub mod fingerprint;
pub mod lda;
pub mod retrieval;
pub mod rng;
pub mod scimap;
pub mod stoplist;
pub mod textprep;

pub use corpus::{
    build_corpus, BuildOptions, Corpus, CorpusError, Document, Granularity, Provenance, Vocabulary,
};
pub use drill::{drill, filter_corpus, DrillError};
pub use lda::{train, GibbsSampler, LdaError, LdaModel, LdaParams, Matrix};
pub use retrieval::{DocRanking, RankedDoc, RetrievalError, TopicRanking, TopicScore};
pub use stoplist::Stoplist;
pub use textprep::{PageText, Volume};
