//! Corpus BLEU-4 without smoothing.
//!
//! Clipped n-gram matches and candidate n-gram totals are summed over the
//! corpus before the precisions are formed. The brevity penalty uses, for
//! each sentence, the reference length closest to the candidate (the shorter
//! one on ties).
//!
//! If the whole corpus has no candidate n-grams of some order, the geometric
//! mean runs only over the orders below it. A zero precision of an order that
//! does have candidate n-grams makes the score 0.

use super::ngram::NGramMultiset;
use crate::error::{Error, Result};
use crate::text::metric_tokens;

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics for corpus BLEU; they add across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn sentence(candidate: &[String], references: &[Vec<String>]) -> Self {
        let mut st = BleuStats {
            candidate_len: candidate.len(),
            reference_len: closest_ref_len(candidate.len(), references),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let cand = NGramMultiset::new(candidate, n);
            let refs: Vec<_> = references.iter().map(|r| NGramMultiset::new(r, n)).collect();
            st.matches[n - 1] = cand
                .counts
                .iter()
                .map(|(g, &c)| c.min(refs.iter().map(|r| r.count(g)).max().unwrap_or(0)))
                .sum();
            st.totals[n - 1] = cand.total();
        }
        st
    }

    pub fn add(&mut self, other: &BleuStats) {
        for i in 0..MAX_ORDER {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.candidate_len == 0 {
            return 0.0;
        }
        (1.0 - self.reference_len as f64 / self.candidate_len as f64)
            .min(0.0)
            .exp()
    }

    /// Score in `[0, 100]`.
    pub fn score(&self) -> f64 {
        let orders = self.totals.iter().take_while(|&&t| t > 0).count();
        if orders == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for i in 0..orders {
            if self.matches[i] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[i] as f64 / self.totals[i] as f64).ln();
        }
        100.0 * self.brevity_penalty() * (log_sum / orders as f64).exp()
    }
}

fn closest_ref_len(cand_len: usize, references: &[Vec<String>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|&l| (l.abs_diff(cand_len), l))
        .unwrap_or(0)
}

/// Corpus BLEU over tokenized input.
pub fn bleu_tokens(outputs: &[Vec<String>], references: &[Vec<Vec<String>>]) -> Result<f64> {
    if outputs.len() != references.len() {
        return Err(Error::domain(format!(
            "BLEU got {} outputs but {} reference sets",
            outputs.len(),
            references.len()
        )));
    }
    if outputs.is_empty() {
        return Err(Error::domain("BLEU of an empty corpus"));
    }
    let mut total = BleuStats::default();
    for (o, r) in outputs.iter().zip(references) {
        total.add(&BleuStats::sentence(o, r));
    }
    Ok(total.score())
}

/// Corpus BLEU using the shared metric tokenizer.
///
/// ```
/// let b = simpkit::metrics::bleu(&["the cat"], &[vec!["the cat sat"]])?;
/// assert!((b - 100.0 * (-0.5f64).exp()).abs() < 1e-9);
/// # Ok::<(), simpkit::Error>(())
/// ```
pub fn bleu<O: AsRef<str>, R: AsRef<str>>(outputs: &[O], references: &[Vec<R>]) -> Result<f64> {
    let outs: Vec<Vec<String>> = outputs.iter().map(|o| metric_tokens(o.as_ref())).collect();
    let refs: Vec<Vec<Vec<String>>> = references
        .iter()
        .map(|rs| rs.iter().map(|r| metric_tokens(r.as_ref())).collect())
        .collect();
    bleu_tokens(&outs, &refs)
}
