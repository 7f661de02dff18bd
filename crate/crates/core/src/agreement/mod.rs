//! Human ratings: Likert means, agreement statistics and task assignment.
//!
//! Ratings are 1..5 Likert values given by an annotator to one system's
//! output for one item on one criterion.
//!
//! ```
//! use simpkit::agreement::{cohen_kappa, Outcome::*};
//!
//! let a = [Win, Win, Tie, Lose];
//! let b = [Win, Tie, Tie, Lose];
//! let k = cohen_kappa(&a, &b)?;
//! assert!((k - 0.4375 / 0.6875).abs() < 1e-12);
//! # Ok::<(), simpkit::Error>(())
//! ```

mod alpha;
mod assign;
mod kappa;
mod store;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Locator, Result};

pub use alpha::{alpha_from_units, krippendorff_alpha, AlphaMetric, AlphaQuery};
pub use assign::{assign_annotation, AssignmentPlan, DisplayOrder};
pub use kappa::{cohen_kappa, pairwise_kappa, PairKappa};
pub use store::{Progress, RatingStore, RECORDS_PER_ITEM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    MeaningPreservation,
    Simplicity,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::MeaningPreservation, Criterion::Simplicity];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::MeaningPreservation => "meaning_preservation",
            Criterion::Simplicity => "simplicity",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meaning_preservation" => Ok(Criterion::MeaningPreservation),
            "simplicity" => Ok(Criterion::Simplicity),
            other => Err(Error::config(format!(
                "unknown criterion {other:?} (meaning_preservation, simplicity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId {
    pub doc_id: String,
    pub sent_index: usize,
}

impl ItemId {
    pub fn new(doc_id: impl Into<String>, sent_index: usize) -> Self {
        ItemId {
            doc_id: doc_id.into(),
            sent_index,
        }
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.doc_id, self.sent_index)
    }
}

/// One Likert judgement; 1 is "strongly disagree", 5 "strongly agree".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rating {
    pub annotator: String,
    pub doc_id: String,
    pub sent_index: usize,
    pub system: String,
    pub criterion: Criterion,
    pub value: u8,
}

/// Uniqueness key of a rating.
pub type RatingKey = (String, ItemId, String, Criterion);

impl Rating {
    pub fn item(&self) -> ItemId {
        ItemId::new(self.doc_id.clone(), self.sent_index)
    }

    pub fn key(&self) -> RatingKey {
        (self.annotator.clone(), self.item(), self.system.clone(), self.criterion)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.value) {
            return Err(Error::domain(format!(
                "rating value {} is outside 1..5 ({} on {} {})",
                self.value,
                self.annotator,
                self.item(),
                self.system
            )));
        }
        if self.annotator.is_empty() || self.system.is_empty() {
            return Err(Error::domain("annotator and system ids must be non-empty"));
        }
        Ok(())
    }
}

/// A set of ratings with no duplicate `(annotator, item, system, criterion)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingTable {
    ratings: Vec<Rating>,
}

impl RatingTable {
    pub fn new(ratings: Vec<Rating>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(ratings.len());
        for r in &ratings {
            r.validate()?;
            if !seen.insert(r.key()) {
                return Err(Error::Integrity(format!(
                    "duplicate rating: {} on {} {} {}",
                    r.annotator,
                    r.item(),
                    r.system,
                    r.criterion
                )));
            }
        }
        Ok(RatingTable { ratings })
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn systems(&self) -> BTreeSet<&str> {
        self.ratings.iter().map(|r| r.system.as_str()).collect()
    }

    pub fn annotators(&self) -> BTreeSet<&str> {
        self.ratings.iter().map(|r| r.annotator.as_str()).collect()
    }

    /// Value of one rating, if present.
    pub fn value(&self, annotator: &str, item: &ItemId, system: &str, criterion: Criterion) -> Option<u8> {
        self.ratings
            .iter()
            .find(|r| {
                r.annotator == annotator
                    && r.criterion == criterion
                    && r.system == system
                    && r.doc_id == item.doc_id
                    && r.sent_index == item.sent_index
            })
            .map(|r| r.value)
    }

    /// CSV with header `annotator,doc_id,sent_index,system,criterion,value`.
    pub fn from_csv_str(text: &str, name: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut ratings = Vec::new();
        for row in reader.deserialize::<Rating>() {
            let r = row.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize);
                let at = match line {
                    Some(l) => Locator::line(name, l),
                    None => Locator::new(name),
                };
                Error::parse(at, e.to_string())
            })?;
            ratings.push(r);
        }
        Self::new(ratings)
    }

    /// A JSON array of rating objects.
    pub fn from_json_str(text: &str, name: &str) -> Result<Self> {
        let ratings: Vec<Rating> =
            serde_json::from_str(text).map_err(|e| Error::parse(Locator::line(name, e.line()), e.to_string()))?;
        Self::new(ratings)
    }

    /// Picks the format from the extension: `.csv`, `.json`, or `.jsonl`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_csv_str(&text, &name),
            Some("json") => Self::from_json_str(&text, &name),
            Some("jsonl") => Self::new(crate::metrics::parse_jsonl(&text, &name)?),
            _ => Err(Error::config(format!(
                "{name}: rating files must end in .csv, .json or .jsonl"
            ))),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.ratings {
            w.serialize(r).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

/// Mean rating per `(system, criterion)`; cells with no ratings are absent.
pub fn likert_means(table: &RatingTable) -> BTreeMap<(String, Criterion), f64> {
    let mut sums: BTreeMap<(String, Criterion), (u64, u64)> = BTreeMap::new();
    for r in table.ratings() {
        let cell = sums.entry((r.system.clone(), r.criterion)).or_default();
        cell.0 += r.value as u64;
        cell.1 += 1;
    }
    sums.into_iter()
        .map(|(k, (s, n))| (k, s as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Win,
    Lose,
    Tie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcomes {
    /// Sorted by item.
    pub outcomes: Vec<(ItemId, Outcome)>,
    /// Items the annotator rated for only one of the two systems.
    pub skipped: usize,
}

/// Per-item comparison of system `a` against system `b` by one annotator.
pub fn to_outcomes(
    table: &RatingTable,
    annotator: &str,
    criterion: Criterion,
    system_a: &str,
    system_b: &str,
) -> Outcomes {
    let mut a: BTreeMap<ItemId, u8> = BTreeMap::new();
    let mut b: BTreeMap<ItemId, u8> = BTreeMap::new();
    for r in table.ratings() {
        if r.annotator != annotator || r.criterion != criterion {
            continue;
        }
        if r.system == system_a {
            a.insert(r.item(), r.value);
        } else if r.system == system_b {
            b.insert(r.item(), r.value);
        }
    }
    let items: BTreeSet<&ItemId> = a.keys().chain(b.keys()).collect();
    let mut outcomes = Vec::new();
    let mut skipped = 0;
    for item in items {
        match (a.get(item), b.get(item)) {
            (Some(x), Some(y)) => {
                let o = match x.cmp(y) {
                    std::cmp::Ordering::Greater => Outcome::Win,
                    std::cmp::Ordering::Less => Outcome::Lose,
                    std::cmp::Ordering::Equal => Outcome::Tie,
                };
                outcomes.push((item.clone(), o));
            }
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{annotator}/{criterion}: {skipped} items lack a rating for one system");
    }
    Outcomes { outcomes, skipped }
}
