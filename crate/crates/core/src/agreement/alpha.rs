use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Criterion, ItemId, RatingTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMetric {
    Nominal,
    Ordinal,
}

/// Which ratings enter an α computation.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaQuery {
    pub criterion: Criterion,
    /// Restrict to one system; otherwise every `(item, system)` is a unit.
    pub system: Option<String>,
    /// Restrict to these annotators.
    pub annotators: Option<Vec<String>>,
    pub metric: AlphaMetric,
}

fn delta_sq(metric: AlphaMetric, values: &[u8], margins: &[f64], c: usize, k: usize) -> f64 {
    debug_assert_eq!(values.len(), margins.len());
    match metric {
        AlphaMetric::Nominal => f64::from(u8::from(c != k)),
        AlphaMetric::Ordinal => {
            let (lo, hi) = if c <= k { (c, k) } else { (k, c) };
            let span: f64 = margins[lo..=hi].iter().sum();
            (span - (margins[c] + margins[k]) / 2.0).powi(2)
        }
    }
}

/// Krippendorff's α over units given as the values each one received.
/// Units with fewer than two values do not pair and are ignored.
pub fn alpha_from_units(units: &[Vec<u8>], metric: AlphaMetric) -> Result<f64> {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return Err(Error::domain(format!(
            "alpha needs at least 2 units with 2 or more ratings, found {}",
            pairable.len()
        )));
    }
    let mut values: Vec<u8> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    values.sort_unstable();
    values.dedup();
    let idx = |v: u8| values.binary_search(&v).expect("value collected above");
    let q = values.len();

    let mut o = vec![vec![0.0; q]; q];
    for u in &pairable {
        let w = 1.0 / (u.len() - 1) as f64;
        for (i, a) in u.iter().enumerate() {
            for (j, b) in u.iter().enumerate() {
                if i != j {
                    o[idx(*a)][idx(*b)] += w;
                }
            }
        }
    }
    let margins: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = margins.iter().sum();

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..q {
        for k in 0..q {
            let d = delta_sq(metric, &values, &margins, c, k);
            observed += o[c][k] * d;
            expected += margins[c] * margins[k] * d;
        }
    }
    if expected == 0.0 {
        return Err(Error::domain("no variation in the ratings; alpha is undefined"));
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

/// α on one criterion of a rating table.
pub fn krippendorff_alpha(table: &RatingTable, query: &AlphaQuery) -> Result<f64> {
    let mut units: BTreeMap<(ItemId, &str), Vec<u8>> = BTreeMap::new();
    for r in table.ratings() {
        if r.criterion != query.criterion {
            continue;
        }
        if query.system.as_deref().is_some_and(|s| s != r.system) {
            continue;
        }
        if let Some(list) = &query.annotators {
            if !list.contains(&r.annotator) {
                continue;
            }
        }
        units.entry((r.item(), r.system.as_str())).or_default().push(r.value);
    }
    let units: Vec<Vec<u8>> = units.into_values().collect();
    alpha_from_units(&units, query.metric)
}
