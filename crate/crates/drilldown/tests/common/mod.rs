//! Twelve synthetic volumes of five pages over six word themes.
//!
//! v00..v03 mix the three mind themes on every page, v04..v06 each hold one
//! mind theme alone, and v07..v11 are physics, economics and theology.

#![allow(dead_code)]

pub mod http;

use std::path::{Path, PathBuf};

use clap::Parser;
use drilldown::cli::{self, Cli, Command, STORE_ENV};
use drilldown::collection::write_collection;
use drilldown_core::Stoplist;
use drilldown_core::{PageText, Volume};
use serde_json::{json, Value};

pub const CONSCIOUSNESS: [&str; 8] = [
    "consciousness",
    "experience",
    "sensation",
    "perception",
    "feeling",
    "awareness",
    "memory",
    "attention",
];
pub const EVOLUTION: [&str; 8] = [
    "animals",
    "evolution",
    "species",
    "instinct",
    "behaviour",
    "habit",
    "adaptation",
    "organism",
];
pub const METHOD: [&str; 8] = [
    "anthropomorphism",
    "inference",
    "analogy",
    "interpretation",
    "observer",
    "method",
    "psychology",
    "introspection",
];
pub const PHYSICS: [&str; 8] = [
    "energy", "velocity", "magnet", "electric", "current", "pressure", "friction", "momentum",
];
pub const ECONOMICS: [&str; 8] = [
    "market", "price", "labour", "capital", "wages", "trade", "demand", "supply",
];
pub const THEOLOGY: [&str; 8] = [
    "scripture",
    "divine",
    "church",
    "sermon",
    "prayer",
    "faith",
    "gospel",
    "salvation",
];

/// Anchor words naming the three mind topics.
pub const ANCHORS: [&str; 3] = ["consciousness", "evolution", "anthropomorphism"];

/// Volumes the mixed-theme drill keeps.
pub const MIXED: [&str; 4] = ["v00", "v01", "v02", "v03"];

const PAGES: usize = 5;
const LINES: usize = 5;
const WORDS_PER_LINE: usize = 12;

struct VolumePlan {
    id: &'static str,
    title: &'static str,
    call_number: Option<&'static str>,
    themes: &'static [&'static [&'static str; 8]],
}

const PLANS: [VolumePlan; 12] = [
    VolumePlan {
        id: "v00",
        title: "The animal mind, 1st ed.",
        call_number: Some("BF671 .W3 1908"),
        themes: &[&CONSCIOUSNESS, &EVOLUTION, &METHOD],
    },
    VolumePlan {
        id: "v01",
        title: "The animal mind, 2nd ed.",
        call_number: Some("BF671 .W3 1917"),
        themes: &[&CONSCIOUSNESS, &EVOLUTION, &METHOD],
    },
    VolumePlan {
        id: "v02",
        title: "Animal intelligence",
        call_number: Some("QL785 .R7"),
        themes: &[&CONSCIOUSNESS, &EVOLUTION, &METHOD],
    },
    VolumePlan {
        id: "v03",
        title: "Comparative psychology",
        call_number: None,
        themes: &[&CONSCIOUSNESS, &EVOLUTION, &METHOD],
    },
    VolumePlan {
        id: "v04",
        title: "Mind and sensation",
        call_number: Some("BF311 .M5"),
        themes: &[&CONSCIOUSNESS],
    },
    VolumePlan {
        id: "v05",
        title: "Origin of habits",
        call_number: Some("QL751 .O7"),
        themes: &[&EVOLUTION],
    },
    VolumePlan {
        id: "v06",
        title: "On method",
        call_number: Some("BF38 .O5"),
        themes: &[&METHOD],
    },
    VolumePlan {
        id: "v07",
        title: "Lectures on energy",
        call_number: Some("QC21 .L4"),
        themes: &[&PHYSICS],
    },
    VolumePlan {
        id: "v08",
        title: "Electric currents",
        call_number: Some("QC73 .E4"),
        themes: &[&PHYSICS],
    },
    VolumePlan {
        id: "v09",
        title: "Principles of trade",
        call_number: Some("HB171 .P7"),
        themes: &[&ECONOMICS],
    },
    VolumePlan {
        id: "v10",
        title: "Wages and capital",
        call_number: Some("HB501 .W3"),
        themes: &[&ECONOMICS],
    },
    VolumePlan {
        id: "v11",
        title: "Sermons",
        call_number: Some("BV4211 .S4"),
        themes: &[&THEOLOGY],
    },
];

fn page(plan: &VolumePlan, v: usize, p: usize) -> PageText {
    let mut lines = vec![format!("{} {}", plan.title.to_uppercase(), p + 1)];
    let n = plan.themes.len();
    for l in 0..LINES {
        let words: Vec<&str> = (0..WORDS_PER_LINE)
            .map(|j| {
                let i = l * WORDS_PER_LINE + j;
                let theme = plan.themes[i % n];
                theme[(i / n * 3 + v + p) % 8]
            })
            .collect();
        lines.push(words.join(" "));
    }
    PageText::new(p as u32, lines)
}

pub fn volumes() -> Vec<Volume> {
    PLANS
        .iter()
        .enumerate()
        .map(|(v, plan)| Volume {
            volume_id: plan.id.into(),
            title: plan.title.into(),
            year: Some(1900 + v as i32),
            call_number: plan.call_number.map(Into::into),
            pages: (0..PAGES).map(|p| page(plan, v, p)).collect(),
        })
        .collect()
}

/// Writes the fixture collection under `dir` and returns its path.
pub fn write_fixture(dir: &Path) -> PathBuf {
    let path = dir.join("collection");
    write_collection(&path, &volumes()).unwrap();
    path
}

pub fn basemap() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/basemap.json")
}

/// Runs the CLI in-process and returns stdout, or the structured error.
pub fn run_cli(store: &Path, args: &[&str]) -> Result<String, String> {
    let mut argv = vec!["drilldown", "--store", store.to_str().unwrap()];
    argv.extend_from_slice(args);
    let parsed = Cli::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    cli::run(parsed, &mut out).map_err(|e| cli::error_json(&e))?;
    Ok(String::from_utf8(out).unwrap())
}

pub fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

pub fn parse(args: &[&str]) -> Cli {
    let mut argv = vec!["drilldown"];
    argv.extend_from_slice(args);
    Cli::try_parse_from(argv).unwrap()
}

/// Effective defaults of the workflow commands.
pub fn defaults_snapshot() -> Value {
    let mut snap = serde_json::Map::new();
    let train = parse(&["train", "--corpus", "C"]);
    if let Command::Train {
        k,
        alpha,
        beta,
        iters,
        average_last,
        ..
    } = train.command
    {
        snap.insert(
            "train".into(),
            json!({"k": k, "alpha": alpha, "beta": beta, "iterations": iters, "seed": train.seed, "average_last": average_last}),
        );
    }
    if let Command::Filter { threshold, .. } =
        parse(&["filter", "--model", "M", "--topics", "1,2,3"]).command
    {
        snap.insert("filter".into(), json!({ "threshold": threshold }));
    }
    if let Command::RankVolumes { pages, top, .. } =
        parse(&["rank-volumes", "--model", "M", "--topics", "1"]).command
    {
        snap.insert("rank_volumes".into(), json!({"pages": pages, "top": top}));
    }
    if let Command::RankPages { top, .. } =
        parse(&["rank-pages", "--model", "M", "--topics", "1"]).command
    {
        snap.insert("rank_pages".into(), json!({ "top": top }));
    }
    if let Command::Topics { n, .. } = parse(&["topics", "--model", "M"]).command {
        snap.insert("topics".into(), json!({ "n": n }));
    }
    let ingest = parse(&["ingest", "--collection", "X"]);
    if let Command::Ingest {
        granularity,
        min_count,
        header_min_pages,
        header_min_fraction,
        ..
    } = ingest.command
    {
        let granularity: drilldown_core::Granularity = granularity.into();
        let stoplist = match ingest.stoplist {
            Some(p) => drilldown::collection::read_stoplist(&p).unwrap(),
            None => Stoplist::english(),
        };
        snap.insert(
            "ingest".into(),
            json!({
                "granularity": granularity,
                "min_count_exclusive": min_count,
                "header_min_pages": header_min_pages,
                "header_min_fraction": header_min_fraction,
                "stoplist_words": stoplist.len(),
            }),
        );
    }
    snap.insert("store_env".into(), json!(STORE_ENV));
    Value::Object(snap)
}

pub fn committed_defaults() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cli_defaults.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
