use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{raw_ratios, BucketSpec, CtVector, FrequencyTable};
use crate::conllu::{DepSentence, TreeIndex, TreeRole};
use crate::corpus::{Corpus, SentencePair};
use crate::error::{Error, Result};
use crate::text::normalize_whitespace;

/// Which fine-tuning stage a tagged file feeds: stage 1 is the general
/// simplification corpus, stage 2 the in-domain training split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Stage1,
    Stage2,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
        })
    }
}

/// Tags `pair.source` with the bucketed ratios measured against
/// `pair.references[ref_index]`.
pub fn annotate_pair(
    pair: &SentencePair,
    ref_index: usize,
    trees: (&DepSentence, &DepSentence),
    table: &FrequencyTable,
    spec: &BucketSpec,
) -> Result<(String, CtVector)> {
    let reference = pair.references.get(ref_index).ok_or_else(|| {
        Error::domain(format!(
            "reference {ref_index} out of range for ({}, {}) with {} references",
            pair.doc_id,
            pair.sent_index,
            pair.references.len()
        ))
    })?;
    let raw = raw_ratios(&pair.source, reference, trees, table)?;
    let v = CtVector::bucketized(raw, spec);
    Ok((v.tag(&pair.source), v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub doc_id: String,
    pub sent_index: usize,
    pub ref_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationReport {
    pub attempted: usize,
    pub errors: Vec<LineError>,
}

impl AnnotationReport {
    pub fn error_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.errors.len() as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationManifest {
    pub stage: Stage,
    pub bucket_spec: BucketSpec,
    pub frequency_table_sha256: String,
    pub source: String,
    pub lines: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedCorpus {
    /// `(tagged source, reference)` in corpus order, references in order.
    pub lines: Vec<(String, String)>,
    pub report: AnnotationReport,
    pub manifest: AnnotationManifest,
}

impl TaggedCorpus {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (tagged, reference) in &self.lines {
            out.push_str(tagged);
            out.push('\t');
            out.push_str(reference);
            out.push('\n');
        }
        out
    }
}

/// One tagged line per (source, reference) combination.
///
/// Lines whose trees are missing or whose ratios fail are collected into the
/// report. The call fails when the error rate exceeds `max_error_rate`
/// (0.0 means any error fails the run).
pub fn annotate_corpus(
    corpus: &Corpus,
    trees: &TreeIndex,
    table: &FrequencyTable,
    spec: &BucketSpec,
    stage: Stage,
    max_error_rate: f64,
) -> Result<TaggedCorpus> {
    spec.validate()?;
    let jobs: Vec<(&SentencePair, usize)> = corpus
        .pairs()
        .iter()
        .flat_map(|p| (0..p.references.len()).map(move |k| (p, k)))
        .collect();

    let results: Vec<Result<(String, String)>> = jobs
        .par_iter()
        .map(|&(pair, k)| {
            let src_tree = trees
                .get(&pair.doc_id, pair.sent_index, TreeRole::Source)
                .ok_or_else(|| Error::Integrity("missing source tree".into()))?;
            let ref_tree = trees
                .get(&pair.doc_id, pair.sent_index, TreeRole::Reference(k))
                .ok_or_else(|| Error::Integrity(format!("missing tree for ref-{k}")))?;
            let (tagged, _) = annotate_pair(pair, k, (src_tree, ref_tree), table, spec)?;
            Ok((tagged, normalize_whitespace(&pair.references[k])))
        })
        .collect();

    let mut report = AnnotationReport {
        attempted: jobs.len(),
        errors: Vec::new(),
    };
    let mut lines = Vec::with_capacity(jobs.len());
    for ((pair, k), res) in jobs.iter().zip(results) {
        match res {
            Ok(line) => lines.push(line),
            Err(e) => report.errors.push(LineError {
                doc_id: pair.doc_id.clone(),
                sent_index: pair.sent_index,
                ref_index: *k,
                message: e.to_string(),
            }),
        }
    }
    if report.error_rate() > max_error_rate {
        let first = &report.errors[0];
        return Err(Error::Integrity(format!(
            "{} of {} lines failed (allowed rate {max_error_rate}); first: ({}, {}, ref-{}): {}",
            report.errors.len(),
            report.attempted,
            first.doc_id,
            first.sent_index,
            first.ref_index,
            first.message
        )));
    }
    let manifest = AnnotationManifest {
        stage,
        bucket_spec: *spec,
        frequency_table_sha256: table.checksum().to_string(),
        source: corpus.provenance.clone(),
        lines: lines.len(),
        errors: report.errors.len(),
    };
    Ok(TaggedCorpus {
        lines,
        report,
        manifest,
    })
}
