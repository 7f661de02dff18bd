//! ROUGE-1, ROUGE-2 and ROUGE-L F1, best reference wins.

use super::ngram::NGramMultiset;
use crate::error::{Error, Result};
use crate::text::metric_tokens;

fn f1_from_counts(overlap: usize, cand: usize, reference: usize) -> f64 {
    match (cand, reference) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => {
            let p = overlap as f64 / cand as f64;
            let r = overlap as f64 / reference as f64;
            if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            }
        }
    }
}

fn usable_refs(references: &[Vec<String>]) -> Result<impl Iterator<Item = &Vec<String>>> {
    if references.iter().all(Vec::is_empty) {
        return Err(Error::domain("ROUGE needs at least one non-empty reference"));
    }
    Ok(references.iter().filter(|r| !r.is_empty()))
}

/// ROUGE-N F1 in `[0, 1]` on tokens.
pub fn rouge_n_tokens(output: &[String], references: &[Vec<String>], n: usize) -> Result<f64> {
    let cand = NGramMultiset::new(output, n);
    Ok(usable_refs(references)?
        .map(|r| {
            let rg = NGramMultiset::new(r, n);
            f1_from_counts(cand.clipped_overlap(&rg), cand.total(), rg.total())
        })
        .fold(0.0, f64::max))
}

/// Longest common subsequence length, two-row table.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 in `[0, 1]` on tokens.
pub fn rouge_l_tokens(output: &[String], references: &[Vec<String>]) -> Result<f64> {
    Ok(usable_refs(references)?
        .map(|r| f1_from_counts(lcs_len(output, r), output.len(), r.len()))
        .fold(0.0, f64::max))
}

/// Sentence ROUGE-N (n = 1 or 2) scaled to `[0, 100]`.
pub fn rouge_n<S: AsRef<str>>(output: &str, references: &[S], n: usize) -> Result<f64> {
    if !(1..=2).contains(&n) {
        return Err(Error::domain(format!("ROUGE-N supports n = 1 or 2, got {n}")));
    }
    let refs: Vec<_> = references.iter().map(|r| metric_tokens(r.as_ref())).collect();
    Ok(100.0 * rouge_n_tokens(&metric_tokens(output), &refs, n)?)
}

/// Sentence ROUGE-L scaled to `[0, 100]`.
///
/// ```
/// let r = simpkit::metrics::rouge_l("a b c d", &["a c d"])?;
/// assert!((r - 100.0 * 6.0 / 7.0).abs() < 1e-9);
/// # Ok::<(), simpkit::Error>(())
/// ```
pub fn rouge_l<S: AsRef<str>>(output: &str, references: &[S]) -> Result<f64> {
    let refs: Vec<_> = references.iter().map(|r| metric_tokens(r.as_ref())).collect();
    Ok(100.0 * rouge_l_tokens(&metric_tokens(output), &refs)?)
}
