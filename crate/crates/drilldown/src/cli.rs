//! Command-line front end. Every subcommand maps onto one `Workspace`
//! operation and writes JSON (or CSV/table for listings) to stdout.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drilldown_core::scimap::PlacementMode;
use drilldown_core::Granularity;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{self, Format};
use crate::overlay;
use crate::server::{self, ServerConfig};
use crate::service::{
    defaults, DrillRequest, FilterRequest, IngestRequest, TrainRequest, Workspace,
};

pub const STORE_ENV: &str = "DRILLDOWN_STORE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl LogLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Error => "error",
            Self::Warn => "warn",
            Self::Info => "info",
            Self::Debug => "debug",
            Self::Trace => "trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Weighted,
    Argmax,
}

impl From<Mode> for PlacementMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Weighted => PlacementMode::Weighted,
            Mode::Argmax => PlacementMode::Argmax,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "drilldown",
    version,
    about = "Topic-model drill-down over digitized book collections"
)]
pub struct Cli {
    /// Store directory holding collections, corpora, models and pipeline.json
    #[arg(long, global = true, env = STORE_ENV, default_value = "drilldown-store")]
    pub store: PathBuf,
    /// Random seed for training and text fold-in
    #[arg(long, global = true, default_value_t = defaults::SEED)]
    pub seed: u64,
    /// Stoplist file, one word per line (bundled English list when absent)
    #[arg(long, global = true)]
    pub stoplist: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,
    /// Output format for listings
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct TopicSelection {
    /// Query topic ids, comma separated
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub topics: Vec<u32>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Read a collection directory, clean it and build the root corpus
    Ingest {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long, value_enum, default_value_t = Gran::Volume)]
        granularity: Gran,
        /// Drop words whose corpus-wide count is at or below this
        #[arg(long, default_value_t = defaults::MIN_COUNT_EXCLUSIVE)]
        min_count: u64,
        #[arg(long, default_value_t = drilldown_core::textprep::HeaderConfig::default().min_pages)]
        header_min_pages: usize,
        #[arg(long, default_value_t = drilldown_core::textprep::HeaderConfig::default().min_fraction)]
        header_min_fraction: f64,
    },
    /// Train an LDA model on a corpus
    Train {
        #[arg(long)]
        corpus: String,
        #[arg(long, default_value_t = defaults::K)]
        k: u32,
        #[arg(long, default_value_t = defaults::ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = defaults::BETA)]
        beta: f64,
        #[arg(long, default_value_t = defaults::ITERATIONS)]
        iters: u32,
        /// Average the estimates of this many final sweeps
        #[arg(long, default_value_t = 1)]
        average_last: u32,
    },
    /// List every topic's most probable words
    Topics {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = defaults::TOP_WORDS)]
        n: usize,
    },
    /// Rank topics by the summed probability of the query words
    TopicQuery {
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        words: Vec<String>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Rank documents by summed topic distance
    RankDocs {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        topics: TopicSelection,
        #[arg(long)]
        top: Option<usize>,
        /// Also report the doc ids at or under this distance
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Keep the documents within a distance threshold as a child corpus
    Filter {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        topics: TopicSelection,
        #[arg(long, default_value_t = defaults::THRESHOLD)]
        threshold: f64,
    },
    /// Re-segment a corpus at a finer granularity
    Drill {
        #[arg(long)]
        corpus: String,
        #[arg(long, value_enum)]
        to: Gran,
        /// Restrict to these volume ids, comma separated
        #[arg(long, value_delimiter = ',')]
        volumes: Option<Vec<String>>,
    },
    /// Rank pages of a page-level model
    RankPages {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        topics: TopicSelection,
        #[arg(long, default_value_t = defaults::TOP_PAGES)]
        top: usize,
    },
    /// Rank volumes by how many of their pages are among the top pages
    RankVolumes {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        topics: TopicSelection,
        #[arg(long, default_value_t = defaults::TOP_PAGES)]
        pages: usize,
        #[arg(long, default_value_t = defaults::TOP_VOLUMES)]
        top: usize,
    },
    /// Sentences closest to an in-model sentence or to raw text
    SimilarSentences {
        #[arg(long)]
        model: String,
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        sentence: Option<String>,
        #[arg(long)]
        text: Option<String>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Tally basemap journals into the call-number crosswalk
    Crosswalk {
        #[arg(long)]
        basemap: PathBuf,
    },
    /// Place a corpus's volumes on the basemap
    Place {
        #[arg(long)]
        basemap: PathBuf,
        #[arg(long)]
        corpus: String,
        /// JSON object mapping volume id to call number
        #[arg(long)]
        call_numbers: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Weighted)]
        mode: Mode,
    },
    /// Write the tiered map overlay for a corpus and its ancestors
    ExportOverlay {
        #[arg(long)]
        basemap: PathBuf,
        /// Focus corpus; its parent is the middle tier, the ingest corpus the base
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        call_numbers: Option<PathBuf>,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export top-ranked pages and a manifest for annotation tools
    ExportAnnotations {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        topics: TopicSelection,
        #[arg(long, default_value_t = defaults::TOP_PAGES)]
        top: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Basemap used by GET /overlay
        #[arg(long)]
        basemap: Option<PathBuf>,
        /// Training jobs run concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Gran {
    Volume,
    Page,
    Sentence,
}

impl From<Gran> for Granularity {
    fn from(g: Gran) -> Self {
        match g {
            Gran::Volume => Granularity::Volume,
            Gran::Page => Granularity::Page,
            Gran::Sentence => Granularity::Sentence,
        }
    }
}

pub fn init_logging(level: LogLevel) {
    let filter = tracing_subscriber::EnvFilter::new(level.as_str());
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn emit<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    write_out(out, &output::to_json(value))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Runs one command, writing its result to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let ws = Workspace::open(&cli.store)?;
    let format = cli.format;
    match cli.command {
        Command::Ingest {
            collection,
            granularity,
            min_count,
            header_min_pages,
            header_min_fraction,
        } => {
            let req = IngestRequest {
                collection,
                granularity: granularity.into(),
                min_count_exclusive: min_count,
                stoplist: cli.stoplist,
                header_min_pages,
                header_min_fraction,
            };
            emit(out, &ws.ingest(&req)?)
        }
        Command::Train {
            corpus,
            k,
            alpha,
            beta,
            iters,
            average_last,
        } => {
            let req = TrainRequest {
                corpus_id: corpus,
                k,
                alpha,
                beta,
                iterations: iters,
                seed: cli.seed,
                average_last,
            };
            let summary = ws.train(&req, |done, total| {
                if done % 100 == 0 || done == total {
                    tracing::info!(done, total, "sweeps");
                }
            })?;
            emit(out, &summary)
        }
        Command::Topics { model, n } => {
            let topics = ws.topics(&model, n)?;
            write_out(
                out,
                &output::render(&topics, || output::topics_table(&topics), format)?,
            )
        }
        Command::TopicQuery { model, words, top } => {
            let r = ws.topic_query(&model, &words, top)?;
            write_out(
                out,
                &output::render(&r, || output::topic_query_table(&r), format)?,
            )
        }
        Command::RankDocs {
            model,
            topics,
            top,
            threshold,
        } => {
            let r = ws.rank_docs(&model, &topics.topics, top, threshold)?;
            write_out(
                out,
                &output::render(&r, || output::ranking_table(&r.ranking), format)?,
            )
        }
        Command::Filter {
            model,
            topics,
            threshold,
        } => emit(
            out,
            &ws.filter(&FilterRequest {
                model_id: model,
                topics: topics.topics,
                threshold,
            })?,
        ),
        Command::Drill {
            corpus,
            to,
            volumes,
        } => emit(
            out,
            &ws.drill(&DrillRequest {
                corpus_id: corpus,
                to: to.into(),
                volumes,
            })?,
        ),
        Command::RankPages { model, topics, top } => {
            let r = ws.rank_pages(&model, &topics.topics, Some(top))?;
            write_out(
                out,
                &output::render(&r, || output::ranking_table(&r), format)?,
            )
        }
        Command::RankVolumes {
            model,
            topics,
            pages,
            top,
        } => {
            let rows = ws.rank_volumes(&model, &topics.topics, pages, top)?;
            write_out(
                out,
                &output::render(&rows, || output::volumes_table(&rows), format)?,
            )
        }
        Command::SimilarSentences {
            model,
            sentence,
            text,
            top,
        } => {
            let r =
                ws.similar_sentences(&model, sentence.as_deref(), text.as_deref(), Some(top))?;
            write_out(
                out,
                &output::render(&r, || output::ranking_table(&r), format)?,
            )
        }
        Command::Crosswalk { basemap } => {
            let t = ws.crosswalk(&basemap)?;
            write_out(
                out,
                &output::render(&t, || output::crosswalk_table(&t), format)?,
            )
        }
        Command::Place {
            basemap,
            corpus,
            call_numbers,
            mode,
        } => {
            let p = ws.place(&basemap, &corpus, call_numbers.as_deref(), mode.into())?;
            write_out(
                out,
                &output::render(&p, || output::placements_table(&p), format)?,
            )
        }
        Command::ExportOverlay {
            basemap,
            corpus,
            call_numbers,
            out: path,
        } => {
            let o = match call_numbers {
                Some(cn) => {
                    let lineage = crate::pipeline::corpus_lineage(ws.store(), &corpus)?;
                    let base = lineage.last().cloned().unwrap_or_else(|| corpus.clone());
                    let mid = (lineage.len() > 2).then(|| lineage[1].clone());
                    let focus = (lineage.len() > 1).then(|| lineage[0].clone());
                    ws.overlay(&basemap, &base, mid.as_deref(), focus.as_deref(), Some(&cn))?
                }
                None => ws.overlay_for(&basemap, &corpus)?,
            };
            let text = match format {
                Format::Csv => overlay::overlay_to_csv(&o)?,
                _ => output::to_json(&o),
            };
            match path {
                Some(p) => crate::formats::write_atomic(&p, text.as_bytes()),
                None => write_out(out, &text),
            }
        }
        Command::ExportAnnotations {
            model,
            topics,
            top,
            out: dir,
        } => emit(
            out,
            &ws.export_annotations(&model, &topics.topics, top, &dir)?,
        ),
        Command::Serve {
            bind,
            basemap,
            jobs,
        } => {
            let config = ServerConfig {
                bind,
                basemap,
                parallel_jobs: jobs.max(1),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            rt.block_on(server::serve(ws, config))
        }
    }
}

/// Structured error line written to stderr on domain failures.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.name(), "detail": e.to_string() }).to_string()
}
