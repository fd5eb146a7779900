//! Collection IO, the content-addressed store, pipeline bookkeeping, the
//! command-line interface and the HTTP API around `drilldown-core`.

pub mod cli;
pub mod collection;
pub mod error;
pub mod formats;
pub mod output;
pub mod overlay;
pub mod pipeline;
pub mod server;
pub mod service;
pub mod store;

pub use error::{Error, Result};
pub use service::Workspace;
pub use store::Store;
