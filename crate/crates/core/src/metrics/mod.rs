//! Automatic scores: SARI, BLEU, ROUGE-1/2/L and an embedding-based F1.
//!
//! Every lexical metric uses [`crate::text::metric_tokens`]. SARI and ROUGE
//! are averaged over sentences; BLEU is pooled over the corpus.

pub mod bleu;
pub mod ngram;
pub mod rouge;
pub mod sari;
pub mod semantic;

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SentencePair;
use crate::error::{Error, Locator, Result};
use crate::text::metric_tokens;

pub use bleu::{bleu, BleuStats};
pub use ngram::NGramMultiset;
pub use rouge::{lcs_len, rouge_l, rouge_n};
pub use sari::sari;
pub use semantic::{semantic_f1, SemanticScore};

/// One sentence worth of token embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedSentence {
    #[serde(default)]
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

/// Reference embeddings for one item: a single record or one per reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceEmbeddings {
    One(EmbeddedSentence),
    Many(Vec<EmbeddedSentence>),
}

impl ReferenceEmbeddings {
    pub fn as_slice(&self) -> &[EmbeddedSentence] {
        match self {
            ReferenceEmbeddings::One(e) => std::slice::from_ref(e),
            ReferenceEmbeddings::Many(v) => v,
        }
    }
}

/// Reads a JSON-lines embeddings file, one record per sentence.
pub fn load_jsonl<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text, &path.display().to_string())
}

pub fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str, name: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::parse(Locator::line(name, i + 1), e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingInputs {
    pub outputs: Vec<EmbeddedSentence>,
    pub references: Vec<ReferenceEmbeddings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSelection {
    pub bleu: bool,
    pub rouge: bool,
    pub sari: bool,
}

impl MetricSelection {
    pub const ALL: MetricSelection = MetricSelection {
        bleu: true,
        rouge: true,
        sari: true,
    };
    pub const SARI_ONLY: MetricSelection = MetricSelection {
        bleu: false,
        rouge: false,
        sari: true,
    };
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub metrics: MetricSelection,
    pub per_sentence: bool,
    pub embeddings: Option<EmbeddingInputs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScores {
    pub doc_id: String,
    pub sent_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge2: Option<f64>,
    #[serde(rename = "rougeL", skip_serializing_if = "Option::is_none")]
    pub rouge_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_f1: Option<f64>,
}

/// Corpus scores. Lexical scores are in `[0, 100]`, `semantic_f1` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: Option<f64>,
    pub rouge1: Option<f64>,
    pub rouge2: Option<f64>,
    #[serde(rename = "rougeL")]
    pub rouge_l: Option<f64>,
    pub sari: Option<f64>,
    pub semantic_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_sentence: Option<Vec<SentenceScores>>,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 6] =
        ["BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "SARI", "SemF1"];

    /// Values in column order; the semantic score is scaled by 100 to sit
    /// alongside the others.
    pub fn row(&self) -> [Option<f64>; 6] {
        [
            self.bleu,
            self.rouge1,
            self.rouge2,
            self.rouge_l,
            self.sari,
            self.semantic_f1.map(|f| 100.0 * f),
        ]
    }
}

impl fmt::Display for MetricReport {
    /// Two-decimal table with a header row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = Self::COLUMNS.iter().map(|c| format!("{c:>8}")).collect();
        writeln!(f, "{}", header.join(" "))?;
        let cells: Vec<String> = self
            .row()
            .iter()
            .map(|v| match v {
                Some(v) => format!("{v:>8.2}"),
                None => format!("{:>8}", "-"),
            })
            .collect();
        writeln!(f, "{}", cells.join(" "))
    }
}

struct Tokenized {
    source: Vec<String>,
    output: Vec<String>,
    refs: Vec<Vec<String>>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Scores a system's outputs against the references in `split`.
pub fn evaluate_system<S: AsRef<str> + Sync>(
    split: &[SentencePair],
    outputs: &[S],
    options: &EvalOptions,
) -> Result<MetricReport> {
    if outputs.len() != split.len() {
        return Err(Error::domain(format!(
            "{} outputs for {} sentence pairs",
            outputs.len(),
            split.len()
        )));
    }
    if outputs.is_empty() {
        return Err(Error::domain("no outputs to evaluate"));
    }
    if let Some(p) = split.iter().find(|p| p.references.is_empty()) {
        return Err(Error::domain(format!(
            "pair ({}, {}) has no references",
            p.doc_id, p.sent_index
        )));
    }
    let sel = options.metrics;
    let items: Vec<Tokenized> = split
        .par_iter()
        .zip(outputs.par_iter())
        .map(|(p, o)| Tokenized {
            source: metric_tokens(&p.source),
            output: metric_tokens(o.as_ref()),
            refs: p.references.iter().map(|r| metric_tokens(r)).collect(),
        })
        .collect();

    let semantic: Option<Vec<f64>> = match &options.embeddings {
        None => None,
        Some(emb) => {
            if emb.outputs.len() != split.len() || emb.references.len() != split.len() {
                return Err(Error::domain(format!(
                    "embeddings cover {} outputs and {} references for {} pairs",
                    emb.outputs.len(),
                    emb.references.len(),
                    split.len()
                )));
            }
            let scores = emb
                .outputs
                .iter()
                .zip(&emb.references)
                .map(|(o, refs)| {
                    refs.as_slice()
                        .iter()
                        .map(|r| semantic_f1(&o.vectors, &r.vectors).map(|s| s.f1))
                        .try_fold(f64::NEG_INFINITY, |best, s| s.map(|s| best.max(s)))
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(scores)
        }
    };

    let per: Vec<SentenceScores> = items
        .par_iter()
        .zip(split.par_iter())
        .enumerate()
        .map(|(i, (t, p))| -> Result<SentenceScores> {
            let (r1, r2, rl) = if sel.rouge {
                (
                    Some(100.0 * rouge::rouge_n_tokens(&t.output, &t.refs, 1)?),
                    Some(100.0 * rouge::rouge_n_tokens(&t.output, &t.refs, 2)?),
                    Some(100.0 * rouge::rouge_l_tokens(&t.output, &t.refs)?),
                )
            } else {
                (None, None, None)
            };
            Ok(SentenceScores {
                doc_id: p.doc_id.clone(),
                sent_index: p.sent_index,
                sari: sel
                    .sari
                    .then(|| sari::sari_tokens(&t.source, &t.output, &t.refs))
                    .transpose()?,
                rouge1: r1,
                rouge2: r2,
                rouge_l: rl,
                semantic_f1: semantic.as_ref().map(|s| s[i]),
            })
        })
        .collect::<Result<_>>()?;

    let bleu = if sel.bleu {
        let mut total = BleuStats::default();
        for t in &items {
            total.add(&BleuStats::sentence(&t.output, &t.refs));
        }
        Some(total.score())
    } else {
        None
    };
    let avg = |f: fn(&SentenceScores) -> Option<f64>| -> Option<f64> {
        per.iter().map(f).collect::<Option<Vec<f64>>>().map(|v| mean(v.into_iter()))
    };
    Ok(MetricReport {
        bleu,
        rouge1: avg(|s| s.rouge1),
        rouge2: avg(|s| s.rouge2),
        rouge_l: avg(|s| s.rouge_l),
        sari: avg(|s| s.sari),
        semantic_f1: avg(|s| s.semantic_f1),
        per_sentence: options.per_sentence.then_some(per),
    })
}
