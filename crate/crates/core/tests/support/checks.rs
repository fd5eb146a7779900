//! Checks shared by the property tests and the acceptance run. Each returns
//! an error message (or a proptest failure) instead of panicking.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use drilldown_core::retrieval::{
    self, rank_volumes_by_page_hits, similar_sentences, SentenceQuery,
};
use drilldown_core::scimap::{
    build_crosswalk, parse_call_number, place_book, Basemap, Discipline, Journal, PlacementConfig,
    PlacementMode, PlacementStatus, Subdiscipline,
};
use drilldown_core::textprep::{
    repair_volume_hyphenation, split_sentences, strip_running_headers, HeaderConfig,
};
use drilldown_core::{
    codec, train, Corpus, GibbsSampler, Granularity, LdaParams, PageText, Volume,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::Dirichlet;

use super::{model_from, normalize, raw_corpus, twenty_docs, volume, WORDS};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

pub fn params(k: u32, iterations: u32, seed: u64) -> LdaParams {
    LdaParams {
        k,
        alpha: 0.1,
        beta: 0.1,
        iterations,
        seed,
        average_last: 1,
    }
}

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    })
}

// ---- synthetic recovery

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Mean aligned L1 between planted and learned topics, and training time.
/// 500 documents of 50 tokens, 3 topics over 20 words.
pub fn recovery() -> (f64, Duration) {
    const K: usize = 3;
    const V: usize = 20;
    let mut rng = StdRng::seed_from_u64(2024);
    let word_prior = Dirichlet::new([0.1; V]).unwrap();
    let topic_prior = Dirichlet::new([0.1; K]).unwrap();
    let truth: Vec<Vec<f64>> = (0..K)
        .map(|_| word_prior.sample(&mut rng).to_vec())
        .collect();
    let word_dists: Vec<WeightedIndex<f64>> = truth
        .iter()
        .map(|p| WeightedIndex::new(p).unwrap())
        .collect();

    let vols: Vec<_> = (0..500)
        .map(|d| {
            let theta = topic_prior.sample(&mut rng);
            let pick = WeightedIndex::new(theta).unwrap();
            let words: Vec<&str> = (0..50)
                .map(|_| WORDS[word_dists[pick.sample(&mut rng)].sample(&mut rng)])
                .collect();
            volume(&format!("d{d:03}"), vec![words.join(" ")])
        })
        .collect();
    let corpus = raw_corpus(&vols, Granularity::Volume);
    assert_eq!(corpus.total_tokens(), 500 * 50);

    let started = Instant::now();
    let model = train(&corpus, params(K as u32, 1000, 42)).unwrap();
    let elapsed = started.elapsed();

    // learned rows re-indexed into WORDS order
    let learned: Vec<Vec<f64>> = (0..K)
        .map(|t| {
            WORDS
                .iter()
                .map(|w| model.word_id(w).map_or(0.0, |id| model.phi[(t, id)]))
                .collect()
        })
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, tr) in truth.iter().enumerate() {
        for (j, le) in learned.iter().enumerate() {
            pairs.push((l1(tr, le), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut used_t, mut used_l) = ([false; K], [false; K]);
    let mut total = 0.0;
    for (d, i, j) in pairs {
        if !used_t[i] && !used_l[j] {
            used_t[i] = true;
            used_l[j] = true;
            total += d;
        }
    }
    (total / K as f64, elapsed)
}

// ---- sampler invariants

/// The four count identities, recomputed from scratch.
pub fn count_identities(corpus: &Corpus, s: &GibbsSampler<'_>, k: usize) -> Check {
    let v = corpus.vocabulary.len();
    let z = s.assignments();
    let mut n_dt = vec![vec![0u32; k]; corpus.documents.len()];
    let mut n_tw = vec![vec![0u32; v]; k];
    for (d, doc) in corpus.documents.iter().enumerate() {
        ensure!(z[d].len() == doc.tokens.len(), "z[{d}] length");
        for (&w, &t) in doc.tokens.iter().zip(&z[d]) {
            n_dt[d][t as usize] += 1;
            n_tw[t as usize][w as usize] += 1;
        }
    }
    for (d, row) in n_dt.iter().enumerate() {
        ensure!(
            s.doc_topic_counts().row(d) == row.as_slice(),
            "n_dt row {d}"
        );
        ensure!(
            row.iter().sum::<u32>() as usize == corpus.documents[d].tokens.len(),
            "n_dt row {d} sum"
        );
    }
    for (t, row) in n_tw.iter().enumerate() {
        ensure!(
            s.topic_word_counts().row(t) == row.as_slice(),
            "n_tw row {t}"
        );
        ensure!(s.topic_totals()[t] == row.iter().sum::<u32>(), "n_t[{t}]");
    }
    let total: u32 = s.topic_totals().iter().sum();
    ensure!(total as usize == corpus.total_tokens(), "sum n_t");
    Ok(())
}

/// Count identities and row sums after every sweep on the 20-document
/// fixture. Returns the number of sweeps checked.
pub fn invariants_every_sweep() -> Result<u32, String> {
    let corpus = twenty_docs();
    ensure!(corpus.documents.len() == 20, "fixture size");
    let k = 4;
    let mut s = GibbsSampler::new(&corpus, params(k, 60, 9)).map_err(|e| e.to_string())?;
    count_identities(&corpus, &s, k as usize)?;
    while !s.is_finished() {
        s.sweep();
        count_identities(&corpus, &s, k as usize)
            .map_err(|e| format!("sweep {}: {e}", s.sweeps_done()))?;
        let (phi, theta) = s.estimate();
        for row in phi.iter_rows().chain(theta.iter_rows()) {
            let sum: f64 = row.iter().sum();
            ensure!((sum - 1.0).abs() <= 1e-9, "row sum {sum}");
        }
    }
    let sweeps = s.sweeps_done();
    ensure!(s.finish().counts_consistent(), "final model counts");
    Ok(sweeps)
}

pub fn determinism() -> Check {
    let corpus = twenty_docs();
    let a = codec::save(&train(&corpus, params(5, 40, 42)).unwrap());
    let b = codec::save(&train(&corpus, params(5, 40, 42)).unwrap());
    ensure!(a == b, "same seed gave different bytes");
    let c = codec::save(&train(&corpus, params(5, 40, 43)).unwrap());
    ensure!(a != c, "different seeds gave identical bytes");
    let back = codec::load(&a).map_err(|e| e.to_string())?;
    ensure!(codec::save(&back) == a, "codec round trip");
    Ok(())
}

// ---- retrieval oracles

fn oracle_cos_distance(theta: &[f64], t: usize) -> f64 {
    // Explicit basis vector and general cosine; zero vectors are orthogonal
    // to everything.
    let e: Vec<f64> = (0..theta.len())
        .map(|i| if i == t { 1.0 } else { 0.0 })
        .collect();
    let dot: f64 = e.iter().zip(theta).map(|(a, b)| a * b).sum();
    let n_theta = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n_e = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n_theta == 0.0 {
        return 1.0;
    }
    1.0 - dot / (n_theta * n_e)
}

/// Position of each item under a strict "comes before" relation.
fn oracle_positions<T>(items: &[T], before: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    items
        .iter()
        .map(|a| items.iter().filter(|b| before(b, a)).count())
        .collect()
}

fn in_order<T: Clone + Default>(items: &[T], pos: &[usize]) -> Vec<T> {
    let mut out = vec![T::default(); items.len()];
    for (item, &p) in items.iter().zip(pos) {
        out[p] = item.clone();
    }
    out
}

fn vocab(v: usize) -> Vec<String> {
    WORDS[..v].iter().map(|w| w.to_string()).collect()
}

/// k topics, v words, φ and θ as small integers before normalizing.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub k: usize,
    pub v: usize,
    pub phi: Vec<Vec<u8>>,
    pub theta: Vec<Vec<u8>>,
}

pub fn fixture() -> impl Strategy<Value = Fixture> {
    (1usize..6, 1usize..8, 1usize..12).prop_flat_map(|(k, v, d)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..4, v), k),
            prop::collection::vec(prop::collection::vec(0u8..4, k), d),
        )
            .prop_map(move |(phi, theta)| Fixture { k, v, phi, theta })
    })
}

pub type TopicQueryCase = (Fixture, Vec<usize>, usize);

pub fn topic_query_case() -> impl Strategy<Value = TopicQueryCase> {
    (
        fixture(),
        prop::collection::vec(0usize..10, 1..6),
        1usize..8,
    )
}

pub fn check_topic_query((f, query, top): TopicQueryCase) -> Result<(), TestCaseError> {
    let (k, v) = (f.k, f.v);
    let phi = normalize(f.phi);
    let vocab = vocab(v);
    let d = f.theta.len();
    let model = model_from(
        &vocab,
        &phi,
        &normalize(f.theta),
        &vec![0; d],
        Granularity::Volume,
    );
    // indices ≥ v name out-of-vocabulary words
    let words: Vec<String> = query
        .iter()
        .map(|&i| {
            if i < v {
                vocab[i].clone()
            } else {
                format!("oov{i}")
            }
        })
        .collect();
    let in_vocab: BTreeSet<usize> = query.iter().copied().filter(|&i| i < v).collect();
    let got = retrieval::topic_query(&model, &words, top);
    if in_vocab.is_empty() {
        prop_assert!(got.is_err());
        return Ok(());
    }
    let got = got.unwrap();
    let scores: Vec<f64> = (0..k)
        .map(|t| in_vocab.iter().map(|&w| phi[t][w]).sum())
        .collect();
    let topics: Vec<usize> = (0..k).collect();
    let pos = oracle_positions(&topics, |&a, &b| {
        scores[a] > scores[b] || (scores[a] == scores[b] && a < b)
    });
    let mut expected = in_order(&topics, &pos);
    expected.truncate(top);
    let got_topics: Vec<usize> = got.entries.iter().map(|e| e.topic as usize).collect();
    prop_assert_eq!(got_topics, expected);
    for e in &got.entries {
        prop_assert_eq!(e.score, scores[e.topic as usize]);
    }
    let ignored: Vec<String> = words
        .iter()
        .filter(|w| w.starts_with("oov"))
        .cloned()
        .collect();
    prop_assert_eq!(got.ignored_words, ignored);
    Ok(())
}

pub type RankDocsCase = (Fixture, u32, Option<usize>);

pub fn rank_docs_case() -> impl Strategy<Value = RankDocsCase> {
    // topic subsets drawn as a non-empty bit set over the fixture's k
    fixture().prop_flat_map(|f| {
        let full = (1u32 << f.k) - 1;
        (Just(f), 1u32..=full, prop::option::of(1usize..12))
    })
}

pub fn check_rank_docs((f, topic_bits, top): RankDocsCase) -> Result<(), TestCaseError> {
    let topics: Vec<u32> = (0..f.k as u32)
        .filter(|t| topic_bits & (1 << t) != 0)
        .collect();
    let theta = normalize(f.theta);
    let d = theta.len();
    let model = model_from(
        &vocab(f.v),
        &normalize(f.phi),
        &theta,
        &vec![0; d],
        Granularity::Volume,
    );
    let got = retrieval::rank_docs(&model, &topics, top).unwrap();

    let dist: Vec<f64> = theta
        .iter()
        .map(|th| {
            topics
                .iter()
                .map(|&t| oracle_cos_distance(th, t as usize))
                .sum()
        })
        .collect();
    let ids: Vec<String> = (0..d).map(|i| format!("d{i:03}")).collect();
    let idx: Vec<usize> = (0..d).collect();
    let pos = oracle_positions(&idx, |&a, &b| {
        dist[a] < dist[b] || (dist[a] == dist[b] && ids[a] < ids[b])
    });
    let mut expected = in_order(&ids, &pos);
    expected.truncate(top.unwrap_or(d));
    let got_ids: Vec<String> = got.entries.iter().map(|e| e.doc_id.clone()).collect();
    prop_assert_eq!(got_ids, expected);
    for e in &got.entries {
        let i: usize = e.doc_id[1..].parse().unwrap();
        prop_assert!(
            (e.distance - dist[i]).abs() <= 1e-12,
            "{} vs {}",
            e.distance,
            dist[i]
        );
    }
    Ok(())
}

pub type RankVolumesCase = (Vec<Vec<u8>>, Vec<usize>, usize, usize);

pub fn rank_volumes_case() -> impl Strategy<Value = RankVolumesCase> {
    (
        prop::collection::vec(prop::collection::vec(0u8..4, 3), 1..30),
        prop::collection::vec(0usize..6, 30),
        1usize..35,
        1usize..8,
    )
}

pub fn check_rank_volumes(
    (theta, volume_of, top_pages, top_volumes): RankVolumesCase,
) -> Result<(), TestCaseError> {
    let d = theta.len();
    let theta = normalize(theta);
    let phi = vec![vec![1.0]; 3];
    let model = model_from(&vocab(1), &phi, &theta, &volume_of[..d], Granularity::Page);
    let ranking = retrieval::rank_docs(&model, &[0, 2], None).unwrap();
    let got = rank_volumes_by_page_hits(&ranking, top_pages, top_volumes).unwrap();

    let head = &ranking.entries[..top_pages.min(d)];
    let vols: BTreeSet<String> = head.iter().map(|e| e.volume_id.clone()).collect();
    let stats: Vec<(String, usize, f64)> = vols
        .into_iter()
        .map(|v| {
            let pages: Vec<f64> = head
                .iter()
                .filter(|e| e.volume_id == v)
                .map(|e| e.distance)
                .collect();
            let best = pages.iter().copied().fold(f64::INFINITY, f64::min);
            (v, pages.len(), best)
        })
        .collect();
    let pos = oracle_positions(&stats, |a, b| {
        a.1 > b.1 || (a.1 == b.1 && (a.2 < b.2 || (a.2 == b.2 && a.0 < b.0)))
    });
    let names: Vec<String> = stats.iter().map(|s| s.0.clone()).collect();
    let mut expected = in_order(&names, &pos);
    expected.truncate(top_volumes);
    let got_ids: Vec<String> = got.iter().map(|h| h.volume_id.clone()).collect();
    prop_assert_eq!(got_ids, expected);
    // stable under repetition
    prop_assert_eq!(
        rank_volumes_by_page_hits(&ranking, top_pages, top_volumes).unwrap(),
        got
    );
    Ok(())
}

// ---- placement oracle

const LETTERS: [&str; 6] = ["QL", "QH", "BF", "B", "QA", "BJ"];

pub fn basemap() -> impl Strategy<Value = Basemap> {
    (
        prop::collection::vec((-50i32..50, -50i32..50), 1..5),
        prop::collection::vec((0usize..6, 0usize..5, 1u32..999), 1..12),
    )
        .prop_map(|(coords, journals)| {
            let n = coords.len();
            Basemap {
                subdisciplines: coords
                    .iter()
                    .enumerate()
                    .map(|(i, &(x, y))| Subdiscipline {
                        sub_id: i as u32 + 1,
                        name: format!("S{i}"),
                        discipline_id: 1,
                        x: f64::from(x) / 4.0,
                        y: f64::from(y) / 4.0,
                    })
                    .collect(),
                disciplines: vec![Discipline {
                    discipline_id: 1,
                    name: "D".into(),
                }],
                journals: journals
                    .iter()
                    .enumerate()
                    .map(|(j, &(l, s, num))| Journal {
                        journal_name: format!("J{j}"),
                        call_number: format!("{}{num}", LETTERS[l]),
                        sub_id: (s % n) as u32 + 1,
                    })
                    .collect(),
            }
        })
}

pub type PlaceCase = (Basemap, usize, bool);

pub fn place_case() -> impl Strategy<Value = PlaceCase> {
    (basemap(), 0usize..6, any::<bool>())
}

pub fn check_place_book((map, book, argmax): PlaceCase) -> Result<(), TestCaseError> {
    let crosswalk = build_crosswalk(&map).unwrap();
    let mode = if argmax {
        PlacementMode::Argmax
    } else {
        PlacementMode::Weighted
    };
    let config = PlacementConfig {
        mode,
        ..PlacementConfig::default()
    };
    let cn = parse_call_number(&format!("{}791 .W3", LETTERS[book])).unwrap();
    let got = place_book("b", Some(&cn), &crosswalk, &map, &config);

    // brute force over journal rows
    let mut scores: Vec<(u32, f64)> = Vec::new();
    for s in &map.subdisciplines {
        let mut full = 0u32;
        let mut first = 0u32;
        for j in map.journals.iter().filter(|j| j.sub_id == s.sub_id) {
            let letters: String = j
                .call_number
                .chars()
                .take_while(|c| c.is_ascii_uppercase())
                .collect();
            full += u32::from(letters == cn.class_letters);
            first += u32::from(letters.chars().next() == cn.class_letters.chars().next());
        }
        let score = 4.0 * f64::from(full) + f64::from(first);
        if score > 0.0 {
            scores.push((s.sub_id, score));
        }
    }
    if scores.is_empty() {
        prop_assert_eq!(got.status, PlacementStatus::Uncatalogued);
        prop_assert!(got.position.is_none());
        return Ok(());
    }
    let total: f64 = scores.iter().map(|s| s.1).sum();
    let expected: Vec<(u32, f64)> = if argmax {
        let best = scores.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        let id = scores.iter().find(|s| s.1 == best).unwrap().0;
        vec![(id, 1.0)]
    } else {
        scores.iter().map(|&(id, s)| (id, s / total)).collect()
    };
    prop_assert_eq!(got.status, PlacementStatus::Placed);
    prop_assert_eq!(got.posterior.len(), expected.len());
    for (g, e) in got.posterior.iter().zip(&expected) {
        prop_assert_eq!(g.0, e.0);
        prop_assert!((g.1 - e.1).abs() <= 1e-12);
    }
    let sum: f64 = got.posterior.iter().map(|p| p.1).sum();
    prop_assert!((sum - 1.0).abs() <= 1e-12);

    let coord = |id: u32| {
        map.subdisciplines
            .iter()
            .find(|s| s.sub_id == id)
            .map(|s| (s.x, s.y))
            .unwrap()
    };
    let ex: f64 = expected.iter().map(|&(id, w)| w * coord(id).0).sum();
    let ey: f64 = expected.iter().map(|&(id, w)| w * coord(id).1).sum();
    let (x, y) = got.position.unwrap();
    prop_assert!((x - ex).abs() <= 1e-9 && (y - ey).abs() <= 1e-9);
    // inside the hull of contributing coordinates
    let xs: Vec<f64> = expected.iter().map(|&(id, _)| coord(id).0).collect();
    let ys: Vec<f64> = expected.iter().map(|&(id, _)| coord(id).1).collect();
    let eps = 1e-9;
    prop_assert!(x >= xs.iter().copied().fold(f64::MAX, f64::min) - eps);
    prop_assert!(x <= xs.iter().copied().fold(f64::MIN, f64::max) + eps);
    prop_assert!(y >= ys.iter().copied().fold(f64::MAX, f64::min) - eps);
    prop_assert!(y <= ys.iter().copied().fold(f64::MIN, f64::max) + eps);
    Ok(())
}

// ---- closed-form checks

/// Uniform θ over 60 topics: one-topic and three-topic distances.
pub fn analytic_distance() -> Result<(f64, f64), String> {
    let k = 60;
    let theta = vec![vec![1.0 / k as f64; k]];
    let model = model_from(
        &vocab(1),
        &vec![vec![1.0]; k],
        &theta,
        &[0],
        Granularity::Volume,
    );
    let single = 1.0 - 1.0 / (k as f64).sqrt();
    let one = retrieval::rank_docs(&model, &[7], None).map_err(|e| e.to_string())?;
    let three = retrieval::rank_docs(&model, &[10, 16, 26], None).map_err(|e| e.to_string())?;
    let (a, b) = (one.entries[0].distance, three.entries[0].distance);
    ensure!((a - single).abs() <= 1e-12, "single {a} vs {single}");
    ensure!(
        (b - 3.0 * single).abs() <= 1e-12,
        "three {b} vs {}",
        3.0 * single
    );
    Ok((a, b))
}

/// Two sub-disciplines: QL journals in 1 at (10, 20), BF in 2 at (−5, 3.5).
pub fn crosswalk_fixture_map() -> Basemap {
    let sub = |sub_id, name: &str, discipline_id, x, y| Subdiscipline {
        sub_id,
        name: name.into(),
        discipline_id,
        x,
        y,
    };
    let journal = |name: &str, cn: &str, sub_id| Journal {
        journal_name: name.into(),
        call_number: cn.into(),
        sub_id,
    };
    Basemap {
        subdisciplines: vec![sub(1, "A", 1, 10.0, 20.0), sub(2, "B", 2, -5.0, 3.5)],
        disciplines: vec![
            Discipline {
                discipline_id: 1,
                name: "Biology".into(),
            },
            Discipline {
                discipline_id: 2,
                name: "Psychology".into(),
            },
        ],
        journals: vec![
            journal("J1", "QL750", 1),
            journal("J2", "QL85", 1),
            journal("J3", "BF660", 2),
        ],
    }
}

pub fn crosswalk_fixture() -> Check {
    let map = crosswalk_fixture_map();
    let table = build_crosswalk(&map).map_err(|e| e.to_string())?;
    let config = PlacementConfig::default();
    for raw in ["QL791", "QH1"] {
        let cn = parse_call_number(raw).map_err(|e| e.to_string())?;
        let p = place_book("b", Some(&cn), &table, &map, &config);
        ensure!(
            p.posterior == vec![(1, 1.0)],
            "{raw}: posterior {:?}",
            p.posterior
        );
        ensure!(
            p.position == Some((10.0, 20.0)),
            "{raw}: position {:?}",
            p.position
        );
        let sum: f64 = p.posterior.iter().map(|e| e.1).sum();
        ensure!((sum - 1.0).abs() <= 1e-12, "{raw}: posterior sum {sum}");
    }
    let p = place_book("b", None, &table, &map, &config);
    ensure!(
        p.status == PlacementStatus::Uncatalogued,
        "no call number placed"
    );
    Ok(())
}

// ---- sentences

pub fn sentence_corpus() -> Corpus {
    let texts = [
        "Animals think. Dogs remember places. Ants follow trails. Dogs remember places.",
        "Minds evolve slowly. Apes use tools. Birds remember songs. Animals think.",
        "Consciousness varies. Instinct guides ants. Experience shapes dogs. Apes use tools.",
    ];
    let vols: Vec<_> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| volume(&format!("v{i}"), vec![t.to_string()]))
        .collect();
    raw_corpus(&vols, Granularity::Sentence)
}

/// Every sentence of the model queried by id. Returns the count checked.
pub fn sentence_self_retrieval() -> Result<usize, String> {
    let corpus = sentence_corpus();
    let model = train(&corpus, params(4, 100, 42)).map_err(|e| e.to_string())?;
    for doc in &model.docs {
        let r = similar_sentences(&model, SentenceQuery::Doc(&doc.doc_id), None)
            .map_err(|e| e.to_string())?;
        ensure!(
            r.entries[0].doc_id == doc.doc_id,
            "{} ranked {} first",
            doc.doc_id,
            r.entries[0].doc_id
        );
        ensure!(
            r.entries[0].distance == 0.0,
            "{} distance {}",
            doc.doc_id,
            r.entries[0].distance
        );
        ensure!(r.entries.len() == model.num_docs(), "ranking length");
    }
    Ok(model.docs.len())
}

// ---- golden files

pub fn golden_dir() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    [here.join("tests/golden"), here.join("../core/tests/golden")]
        .into_iter()
        .find(|p| p.is_dir())
        .expect("golden directory")
}

pub fn golden(name: &str) -> String {
    let path = golden_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Page files use a `=== page N ===` line before each page's lines.
pub fn parse_pages(text: &str) -> Vec<PageText> {
    let mut pages: Vec<PageText> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("=== page ") {
            let idx = rest.trim_end_matches(" ===").parse().unwrap();
            pages.push(PageText::new(idx, Vec::<String>::new()));
        } else {
            pages
                .last_mut()
                .expect("marker first")
                .lines
                .push(line.to_owned());
        }
    }
    pages
}

pub fn render_pages(pages: &[PageText]) -> String {
    let mut out = String::new();
    for p in pages {
        out.push_str(&format!("=== page {} ===\n", p.page_index));
        for l in &p.lines {
            out.push_str(l);
            out.push('\n');
        }
    }
    out
}

pub fn golden_volume(pages: Vec<PageText>) -> Volume {
    Volume {
        volume_id: "golden".into(),
        title: "Golden".into(),
        year: None,
        call_number: None,
        pages,
    }
}

/// `(name, produced, expected)` for each cleanup stage.
pub fn golden_outputs() -> Vec<(&'static str, String, String)> {
    let hyphen = render_pages(&repair_volume_hyphenation(&parse_pages(&golden(
        "hyphenation.input.txt",
    ))));
    let v = golden_volume(parse_pages(&golden("headers.input.txt")));
    let headers = render_pages(&strip_running_headers(&v, &HeaderConfig::default()).pages);
    let mut sentences = split_sentences(&golden("sentences.input.txt")).join("\n");
    sentences.push('\n');
    vec![
        ("hyphenation", hyphen, golden("hyphenation.expected.txt")),
        ("headers", headers, golden("headers.expected.txt")),
        ("sentences", sentences, golden("sentences.expected.txt")),
    ]
}
