//! SARI over n-gram sets, n = 1..4.
//!
//! With `S`, `O` the n-gram sets of source and output and `w(g)` the share of
//! references containing `g`:
//!
//! * keep: precision `Σ_{S∩O} w / |S∩O|`, recall `Σ_{S∩O} w / Σ_S w`, F1;
//! * delete: precision `Σ_{S∖O} (1 − w) / |S∖O|`;
//! * add: precision and recall of `O∖S` against `R∖S` (`R` = union of
//!   reference n-grams), F1.
//!
//! Each component has a candidate set (what the system kept, deleted or
//! added) and a target set (what the references keep, delete or add). When
//! both are empty the component scores 1; when exactly one is empty it
//! scores 0.

use std::collections::{HashMap, HashSet};

use super::ngram::NGramMultiset;
use crate::error::{Error, Result};
use crate::text::metric_tokens;

pub const MAX_ORDER: usize = 4;

/// Keep F1, add F1 and delete precision for one n-gram order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariComponents {
    pub keep_f1: f64,
    pub add_f1: f64,
    pub del_precision: f64,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn empty_rule(candidate_empty: bool, target_empty: bool) -> Option<f64> {
    match (candidate_empty, target_empty) {
        (true, true) => Some(1.0),
        (true, false) | (false, true) => Some(0.0),
        (false, false) => None,
    }
}

pub fn sari_components(
    source: &[String],
    output: &[String],
    references: &[Vec<String>],
    n: usize,
) -> SariComponents {
    let s = NGramMultiset::new(source, n).keys();
    let o = NGramMultiset::new(output, n).keys();
    let mut weight: HashMap<&[String], f64> = HashMap::new();
    let share = 1.0 / references.len() as f64;
    for r in references {
        for g in NGramMultiset::new(r, n).keys() {
            *weight.entry(g).or_insert(0.0) += share;
        }
    }
    let w = |g: &[String]| weight.get(g).copied().unwrap_or(0.0);

    // keep
    let kept: Vec<&[String]> = s.intersection(&o).copied().collect();
    let keep_target: Vec<&[String]> = s.iter().copied().filter(|g| w(g) > 0.0).collect();
    let keep_f1 = empty_rule(kept.is_empty(), keep_target.is_empty()).unwrap_or_else(|| {
        let good: f64 = kept.iter().map(|g| w(g)).sum();
        let p = good / kept.len() as f64;
        let r = good / keep_target.iter().map(|g| w(g)).sum::<f64>();
        f1(p, r)
    });

    // delete
    let deleted: Vec<&[String]> = s.difference(&o).copied().collect();
    let del_target = s.iter().any(|g| w(g) < 1.0 - 1e-12);
    let del_precision = empty_rule(deleted.is_empty(), !del_target).unwrap_or_else(|| {
        deleted.iter().map(|g| 1.0 - w(g)).sum::<f64>() / deleted.len() as f64
    });

    // add
    let added: HashSet<&[String]> = o.difference(&s).copied().collect();
    let add_target: HashSet<&[String]> =
        weight.keys().copied().filter(|g| !s.contains(g)).collect();
    let add_f1 = empty_rule(added.is_empty(), add_target.is_empty()).unwrap_or_else(|| {
        let good = added.intersection(&add_target).count() as f64;
        f1(good / added.len() as f64, good / add_target.len() as f64)
    });

    SariComponents {
        keep_f1,
        add_f1,
        del_precision,
    }
}

/// SARI on pre-tokenized input, in `[0, 100]`.
pub fn sari_tokens(source: &[String], output: &[String], references: &[Vec<String>]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::domain("SARI needs at least one reference"));
    }
    let total: f64 = (1..=MAX_ORDER)
        .map(|n| {
            let c = sari_components(source, output, references, n);
            (c.keep_f1 + c.add_f1 + c.del_precision) / 3.0
        })
        .sum();
    Ok(100.0 * total / MAX_ORDER as f64)
}

/// Sentence-level SARI using the shared metric tokenizer.
///
/// ```
/// let s = simpkit::metrics::sari("The cat sat.", "The cat sat.", &["The cat sat."])?;
/// assert_eq!(s, 100.0);
/// # Ok::<(), simpkit::Error>(())
/// ```
pub fn sari<S: AsRef<str>>(source: &str, output: &str, references: &[S]) -> Result<f64> {
    let refs: Vec<Vec<String>> = references.iter().map(|r| metric_tokens(r.as_ref())).collect();
    sari_tokens(&metric_tokens(source), &metric_tokens(output), &refs)
}
