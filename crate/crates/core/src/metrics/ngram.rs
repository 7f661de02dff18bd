use std::collections::{HashMap, HashSet};

/// Counted n-grams of one order, borrowing the token slice they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset<'a> {
    pub n: usize,
    pub counts: HashMap<&'a [String], usize>,
}

impl<'a> NGramMultiset<'a> {
    pub fn new(tokens: &'a [String], n: usize) -> Self {
        let mut counts = HashMap::new();
        if n >= 1 && tokens.len() >= n {
            for w in tokens.windows(n) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
        NGramMultiset { n, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Σ min(self[g], other[g]).
    pub fn clipped_overlap(&self, other: &NGramMultiset<'_>) -> usize {
        self.counts
            .iter()
            .map(|(g, &c)| c.min(other.count(g)))
            .sum()
    }

    pub fn keys(&self) -> HashSet<&'a [String]> {
        self.counts.keys().copied().collect()
    }
}
