use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::Serialize;

use super::{to_outcomes, Criterion, ItemId, RatingTable};
use crate::error::{Error, Result};

/// Cohen's κ of two equally long label sequences.
///
/// When both raters use one identical label throughout (`p_e = 1`), κ is 1
/// if they always agree and 0 otherwise.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!("label lists differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::domain("kappa of empty label lists"));
    }
    let n = a.len() as f64;
    let mut ma: HashMap<&T, usize> = HashMap::new();
    let mut mb: HashMap<&T, usize> = HashMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
        agree += usize::from(x == y);
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = ma
        .iter()
        .map(|(k, ca)| (*ca * mb.get(k).copied().unwrap_or(0)) as f64)
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(if p_o == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairKappa {
    pub kappa: f64,
    /// Items both annotators compared.
    pub items: usize,
}

/// κ between two annotators on their win/lose/tie outcomes for the items
/// both of them rated.
pub fn pairwise_kappa(
    table: &RatingTable,
    annotators: (&str, &str),
    criterion: Criterion,
    systems: (&str, &str),
) -> Result<PairKappa> {
    let first: BTreeMap<ItemId, _> = to_outcomes(table, annotators.0, criterion, systems.0, systems.1)
        .outcomes
        .into_iter()
        .collect();
    let second = to_outcomes(table, annotators.1, criterion, systems.0, systems.1);
    let (la, lb): (Vec<_>, Vec<_>) = second
        .outcomes
        .iter()
        .filter_map(|(item, o)| first.get(item).map(|p| (*p, *o)))
        .unzip();
    if la.is_empty() {
        return Err(Error::domain(format!(
            "annotators {} and {} share no compared items",
            annotators.0, annotators.1
        )));
    }
    Ok(PairKappa {
        kappa: cohen_kappa(&la, &lb)?,
        items: la.len(),
    })
}
