use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Locator, Result};

/// Word frequency ranks, 1 being the most frequent word.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    rank_of: HashMap<String, u64>,
    max_rank: u64,
    checksum: String,
}

impl FrequencyTable {
    pub fn from_ranks<I, S>(ranks: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut table = FrequencyTable::default();
        for (w, r) in ranks {
            table.insert(w.into(), r);
        }
        table
    }

    fn insert(&mut self, word: String, rank: u64) {
        self.max_rank = self.max_rank.max(rank);
        self.rank_of.entry(word.to_lowercase()).or_insert(rank);
    }

    /// Parses either one word per line in descending frequency order (line
    /// number is the rank) or `word<TAB>rank` lines.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut table = FrequencyTable::default();
        let mut rank = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            match line.split_once('\t') {
                Some((word, r)) => {
                    let r: u64 = r.trim().parse().ok().filter(|&r| r >= 1).ok_or_else(|| {
                        Error::parse(Locator::line(name, lineno + 1), format!("bad rank {r:?}"))
                    })?;
                    table.insert(word.trim().to_string(), r);
                }
                None => {
                    rank += 1;
                    table.insert(line.trim().to_string(), rank);
                }
            }
        }
        table.checksum = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn rank(&self, word: &str) -> Option<u64> {
        self.rank_of.get(word).copied()
    }

    pub fn max_rank(&self) -> u64 {
        self.max_rank
    }

    pub fn len(&self) -> usize {
        self.rank_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_of.is_empty()
    }

    /// `ln(1 + rank)`, with unknown words at `max_rank`.
    pub fn log_rank(&self, word: &str) -> f64 {
        let r = self.rank(word).unwrap_or(self.max_rank);
        (1.0 + r as f64).ln()
    }

    /// SHA-256 of the file contents this table was parsed from (empty when
    /// built in memory).
    pub fn checksum(&self) -> &str {
        &self.checksum
    }
}
