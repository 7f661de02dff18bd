//! Parallel corpora: loading, removal of 1-to-0 pairs, and seeded splits.
//!
//! Two on-disk layouts are accepted. The JSON layout maps each document id
//! to its source sentences and the aligned reference lists:
//!
//! ```json
//! { "doc-1": { "source": ["s0", "s1"], "refs": [["r00", "r01"], []] } }
//! ```
//!
//! The TSV layout is one pair per line, `source<TAB>ref1<TAB>ref2...`. TSV
//! pairs all belong to the document id `"tsv"` and are numbered by line.
//!
//! All text is whitespace-normalized at load time.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Locator, Result};
use crate::text::normalize_whitespace;

/// Name of the generator used for split shuffling; recorded in manifests.
pub const SPLIT_PRNG: &str = "ChaCha8Rng::seed_from_u64";

/// Document id given to every pair read from TSV.
pub const TSV_DOC_ID: &str = "tsv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub doc_id: String,
    pub sent_index: usize,
    pub source: String,
    pub references: Vec<String>,
}

impl SentencePair {
    pub fn key(&self) -> (&str, usize) {
        (&self.doc_id, self.sent_index)
    }

    /// Number of non-empty references.
    pub fn usable_references(&self) -> usize {
        self.references.iter().filter(|r| !r.trim().is_empty()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pairs: Vec<SentencePair>,
    pub provenance: String,
}

impl Corpus {
    /// Builds a corpus, normalizing whitespace and checking that every source
    /// is non-empty and every `(doc_id, sent_index)` is unique.
    pub fn new(pairs: Vec<SentencePair>, provenance: impl Into<String>) -> Result<Self> {
        let provenance = provenance.into();
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(pairs.len());
        for mut pair in pairs {
            pair.source = normalize_whitespace(&pair.source);
            if pair.source.is_empty() {
                return Err(Error::Integrity(format!(
                    "{provenance}: empty source for ({}, {})",
                    pair.doc_id, pair.sent_index
                )));
            }
            for r in &mut pair.references {
                *r = normalize_whitespace(r);
            }
            if !seen.insert((pair.doc_id.clone(), pair.sent_index)) {
                return Err(Error::Integrity(format!(
                    "{provenance}: duplicate pair id ({}, {})",
                    pair.doc_id, pair.sent_index
                )));
            }
            out.push(pair);
        }
        Ok(Corpus {
            pairs: out,
            provenance,
        })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    PlabaJson,
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plaba-json" | "json" => Ok(CorpusFormat::PlabaJson),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::config(format!(
                "unknown corpus format {other:?} (expected plaba-json or tsv)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::PlabaJson => "plaba-json",
            CorpusFormat::Tsv => "tsv",
        })
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::parse(Locator::new(&name), format!("invalid UTF-8: {e}")))?;
    let provenance = format!("{name} ({format})");
    match format {
        CorpusFormat::PlabaJson => parse_plaba_json(&text, &name, provenance),
        CorpusFormat::Tsv => parse_tsv(&text, &name, provenance),
    }
}

#[derive(Deserialize)]
struct JsonDocument {
    source: Vec<String>,
    #[serde(default)]
    refs: Vec<Vec<String>>,
}

pub fn parse_plaba_json(text: &str, name: &str, provenance: String) -> Result<Corpus> {
    let docs: IndexMap<String, JsonDocument> = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            Locator::line(name, e.line()),
            format!("column {}: {e}", e.column()),
        )
    })?;
    let mut pairs = Vec::new();
    for (doc_id, doc) in docs {
        if doc.refs.len() != doc.source.len() {
            return Err(Error::parse(
                Locator::new(format!("{name}#{doc_id}")),
                format!(
                    "{} source sentences but {} reference lists",
                    doc.source.len(),
                    doc.refs.len()
                ),
            ));
        }
        for (i, (source, refs)) in doc.source.into_iter().zip(doc.refs).enumerate() {
            if source.trim().is_empty() {
                return Err(Error::parse(
                    Locator::new(format!("{name}#{doc_id}/{i}")),
                    "empty source sentence",
                ));
            }
            pairs.push(SentencePair {
                doc_id: doc_id.clone(),
                sent_index: i,
                source,
                references: refs,
            });
        }
    }
    Corpus::new(pairs, provenance)
}

pub fn parse_tsv(text: &str, name: &str, provenance: String) -> Result<Corpus> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split('\t');
        let source = cells.next().unwrap_or_default();
        if source.trim().is_empty() {
            return Err(Error::parse(
                Locator::line(name, lineno + 1),
                "empty source cell",
            ));
        }
        pairs.push(SentencePair {
            doc_id: TSV_DOC_ID.to_string(),
            sent_index: pairs.len(),
            source: source.to_string(),
            references: cells.map(str::to_string).collect(),
        });
    }
    Corpus::new(pairs, provenance)
}

/// Renders pairs in the TSV layout accepted by [`load_corpus`].
pub fn to_tsv(pairs: &[SentencePair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&p.source);
        for r in &p.references {
            out.push('\t');
            out.push_str(r);
        }
        out.push('\n');
    }
    out
}

/// Drops empty references, then drops pairs left with none.
pub fn filter_one_to_zero(corpus: Corpus) -> Corpus {
    let Corpus { pairs, provenance } = corpus;
    let pairs = pairs
        .into_iter()
        .filter_map(|mut p| {
            p.references.retain(|r| !r.trim().is_empty());
            (!p.references.is_empty()).then_some(p)
        })
        .collect();
    Corpus { pairs, provenance }
}

/// Train/validation/test proportions. Must be positive and sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const EIGHT_ONE_ONE: SplitRatios = SplitRatios {
        train: 0.8,
        validation: 0.1,
        test: 0.1,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::config(format!(
                "split ratios must be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    /// Parses `a:b:c` (e.g. `8:1:1`) and normalizes it to sum to one.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(format!("bad ratio {s:?}: {e}")))?;
        if parts.len() != 3 {
            return Err(Error::config(format!(
                "expected three ratios like 8:1:1, got {s:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        let r = SplitRatios {
            train: parts[0] / sum,
            validation: parts[1] / sum,
            test: parts[2] / sum,
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<SentencePair>,
    pub validation: Vec<SentencePair>,
    pub test: Vec<SentencePair>,
    pub seed: u64,
    pub ratios: SplitRatios,
    /// Pairs missing from (validation, test) because the multi-reference pool ran out.
    pub shortfall: (usize, usize),
}

/// Summary written next to the split files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub prng: String,
    pub ratios: SplitRatios,
    pub unit: String,
    pub counts: SplitCounts,
    pub shortfall: SplitCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitResult {
    pub fn manifest(&self) -> SplitManifest {
        SplitManifest {
            seed: self.seed,
            prng: SPLIT_PRNG.to_string(),
            ratios: self.ratios,
            unit: "sentence-pair".to_string(),
            counts: SplitCounts {
                train: self.train.len(),
                validation: self.validation.len(),
                test: self.test.len(),
            },
            shortfall: SplitCounts {
                train: 0,
                validation: self.shortfall.0,
                test: self.shortfall.1,
            },
        }
    }
}

fn floor_share(ratio: f64, n: usize) -> usize {
    (ratio * n as f64 + 1e-9).floor() as usize
}

/// Seeded split by sentence pair.
///
/// Validation and test are drawn only from pairs with at least two
/// references: that pool is shuffled, test takes the first `⌊test·N⌋`, then
/// validation the next `⌊validation·N⌋`. Everything else is train. Each
/// split keeps corpus order.
pub fn split(corpus: &Corpus, ratios: SplitRatios, seed: u64) -> Result<SplitResult> {
    ratios.validate()?;
    let n = corpus.len();
    let want_test = floor_share(ratios.test, n);
    let want_val = floor_share(ratios.validation, n);

    let mut pool: Vec<usize> = corpus
        .pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.usable_references() >= 2)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);

    let n_test = want_test.min(pool.len());
    let n_val = want_val.min(pool.len() - n_test);
    let mut role = vec![0u8; n];
    for &i in &pool[..n_test] {
        role[i] = 2;
    }
    for &i in &pool[n_test..n_test + n_val] {
        role[i] = 1;
    }

    let mut result = SplitResult {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
        ratios,
        shortfall: (want_val - n_val, want_test - n_test),
    };
    for (pair, r) in corpus.pairs.iter().zip(role) {
        let bucket = match r {
            0 => &mut result.train,
            1 => &mut result.validation,
            _ => &mut result.test,
        };
        bucket.push(pair.clone());
    }
    Ok(result)
}
