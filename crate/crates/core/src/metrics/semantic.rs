//! Greedy-matching F1 over token embeddings, in the style of BERTScore.
//!
//! The embeddings come from outside: this crate runs no encoder. Recall is
//! the mean, over reference tokens, of the best cosine to any output token;
//! precision is the same with the roles swapped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check(vectors: &[Vec<f64>], dim: usize, what: &str) -> Result<Vec<f64>> {
    if vectors.is_empty() {
        return Err(Error::domain(format!("{what} has no vectors")));
    }
    vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != dim {
                return Err(Error::domain(format!(
                    "{what} vector {i} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            let n = norm(v);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::domain(format!("{what} vector {i} is zero or not finite")));
            }
            Ok(n)
        })
        .collect()
}

pub fn semantic_f1(output: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<SemanticScore> {
    let dim = output
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::domain("output has no vectors"))?;
    let on = check(output, dim, "output")?;
    let rn = check(reference, dim, "reference")?;

    let cos: Vec<Vec<f64>> = output
        .iter()
        .zip(&on)
        .map(|(o, &no)| {
            reference
                .iter()
                .zip(&rn)
                .map(|(r, &nr)| o.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / (no * nr))
                .collect()
        })
        .collect();

    let precision = cos
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / output.len() as f64;
    let recall = (0..reference.len())
        .map(|j| cos.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / reference.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(SemanticScore {
        precision,
        recall,
        f1,
    })
}
