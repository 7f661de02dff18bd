//! The four control ratios, their discretization, and tagged training files.
//!
//! For a source sentence and one of its simplifications:
//!
//! | token | ratio |
//! |---|---|
//! | `<DEPENDENCYTREEDEPTH_x>` | dependency tree depth, output over source |
//! | `<WORDRANK_x>` | third quartile of `ln(1 + rank)`, output over source |
//! | `<REPLACEONLYLEVENSHTEIN_x>` | `1 - substitutions / max length`, characters |
//! | `<LENGTHRATIO_x>` | character length, output over source |
//!
//! Each ratio is snapped to a [`BucketSpec`] grid and printed with two
//! decimals in front of the source:
//!
//! ```
//! use simpkit::control_tokens::{bucketize, BucketSpec, CtVector};
//!
//! let spec = BucketSpec::default();
//! let v = CtVector { dtd: 0.8, wr: 0.7, lv: 0.6, lr: bucketize(0.63, &spec) };
//! assert_eq!(
//!     v.prefix(),
//!     "<DEPENDENCYTREEDEPTH_0.80> <WORDRANK_0.70> <REPLACEONLYLEVENSHTEIN_0.60> <LENGTHRATIO_0.65> "
//! );
//! ```

mod annotate;
mod frequency;
pub mod levenshtein;

pub use annotate::{
    annotate_corpus, annotate_pair, AnnotationManifest, AnnotationReport, LineError, Stage,
    TaggedCorpus,
};
pub use frequency::FrequencyTable;

use serde::{Deserialize, Serialize};

use crate::conllu::{tree_depth, DepSentence};
use crate::error::{Error, Result};
use crate::text::{lexical_words, normalize_whitespace};

/// Token names in prefix order.
pub const TOKEN_NAMES: [&str; 4] = [
    "DEPENDENCYTREEDEPTH",
    "WORDRANK",
    "REPLACEONLYLEVENSHTEIN",
    "LENGTHRATIO",
];

/// Discrete grid of ratio values: multiples of `step` within `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketSpec {
    pub step: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for BucketSpec {
    fn default() -> Self {
        BucketSpec {
            step: 0.05,
            min: 0.20,
            max: 1.50,
        }
    }
}

const GRID_TOL: f64 = 1e-9;

impl BucketSpec {
    pub fn new(step: f64, min: f64, max: f64) -> Result<Self> {
        let spec = BucketSpec { step, min, max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!("bucket step must be positive, got {}", self.step)));
        }
        if !(self.min < self.max) {
            return Err(Error::config(format!(
                "bucket min {} must be below max {}",
                self.min, self.max
            )));
        }
        for (name, v) in [("min", self.min), ("max", self.max)] {
            if !self.on_grid(v) {
                return Err(Error::config(format!(
                    "bucket {name} {v} is not a multiple of step {}",
                    self.step
                )));
            }
        }
        Ok(())
    }

    fn on_grid(&self, v: f64) -> bool {
        let k = v / self.step;
        (k - k.round()).abs() <= GRID_TOL * k.abs().max(1.0)
    }

    /// Every grid value in ascending order.
    pub fn grid(&self) -> Vec<f64> {
        let lo = (self.min / self.step).round() as i64;
        let hi = (self.max / self.step).round() as i64;
        (lo..=hi).map(|k| self.value_at(k)).collect()
    }

    fn value_at(&self, k: i64) -> f64 {
        // Round away representation noise such as 0.6500000000000001.
        let v = k as f64 * self.step;
        (v * 1e12).round() / 1e12
    }

    /// True if `v` lies on the grid within floating tolerance.
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min - GRID_TOL && v <= self.max + GRID_TOL && self.on_grid(v)
    }
}

/// Nearest multiple of `spec.step` (ties go up), clamped to `[min, max]`.
pub fn bucketize(raw: f64, spec: &BucketSpec) -> f64 {
    let k = (raw / spec.step + 0.5 + GRID_TOL).floor() as i64;
    let lo = (spec.min / spec.step).round() as i64;
    let hi = (spec.max / spec.step).round() as i64;
    spec.value_at(k.clamp(lo, hi))
}

/// Bucketed control values in the fixed order DTD, WR, LV, LR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtVector {
    pub dtd: f64,
    pub wr: f64,
    pub lv: f64,
    pub lr: f64,
}

impl CtVector {
    pub fn values(&self) -> [f64; 4] {
        [self.dtd, self.wr, self.lv, self.lr]
    }

    /// The four tokens, each followed by one space.
    pub fn prefix(&self) -> String {
        TOKEN_NAMES
            .iter()
            .zip(self.values())
            .map(|(name, v)| format!("<{name}_{v:.2}> "))
            .collect()
    }

    pub fn tag(&self, source: &str) -> String {
        format!("{}{}", self.prefix(), normalize_whitespace(source))
    }

    pub fn bucketized(raw: [f64; 4], spec: &BucketSpec) -> CtVector {
        CtVector {
            dtd: bucketize(raw[0], spec),
            wr: bucketize(raw[1], spec),
            lv: bucketize(raw[2], spec),
            lr: bucketize(raw[3], spec),
        }
    }
}

fn normalized_chars(s: &str) -> Vec<char> {
    normalize_whitespace(s).chars().collect()
}

/// Output length over source length, in characters after normalization.
pub fn length_ratio(source: &str, output: &str) -> Result<f64> {
    let src = normalized_chars(source).len();
    if src == 0 {
        return Err(Error::domain("length ratio of an empty source"));
    }
    Ok(normalized_chars(output).len() as f64 / src as f64)
}

/// `1 - R / max(|source|, |output|)` where `R` is the substitution count of
/// a minimum-cost character alignment.
pub fn replace_only_levenshtein_sim(source: &str, output: &str) -> Result<f64> {
    let a = normalized_chars(source);
    let b = normalized_chars(output);
    if a.is_empty() {
        return Err(Error::domain("levenshtein similarity of an empty source"));
    }
    let aln = levenshtein::align(&a, &b);
    Ok(1.0 - aln.substitutions as f64 / a.len().max(b.len()) as f64)
}

/// Linear-interpolated quantile of sorted values (`q` in `[0, 1]`).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Third quartile of `ln(1 + rank)` over the words of `s`; `None` when `s`
/// has no words.
pub fn lexical_complexity(s: &str, table: &FrequencyTable) -> Option<f64> {
    let mut values: Vec<f64> = lexical_words(s)
        .iter()
        .map(|w| table.log_rank(w))
        .collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(quantile_sorted(&values, 0.75))
}

/// Lexical complexity of the output over that of the source. An output with
/// no words scores 0.
pub fn word_rank_ratio(source: &str, output: &str, table: &FrequencyTable) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::domain("word rank ratio needs a non-empty frequency table"));
    }
    let src = lexical_complexity(source, table)
        .ok_or_else(|| Error::domain("word rank ratio of a source with no words"))?;
    Ok(lexical_complexity(output, table).unwrap_or(0.0) / src)
}

pub fn dtd_ratio(source_tree: &DepSentence, output_tree: &DepSentence) -> f64 {
    tree_depth(output_tree) as f64 / tree_depth(source_tree) as f64
}

/// All four raw (unbucketed) ratios in prefix order.
pub fn raw_ratios(
    source: &str,
    output: &str,
    trees: (&DepSentence, &DepSentence),
    table: &FrequencyTable,
) -> Result<[f64; 4]> {
    Ok([
        dtd_ratio(trees.0, trees.1),
        word_rank_ratio(source, output, table)?,
        replace_only_levenshtein_sim(source, output)?,
        length_ratio(source, output)?,
    ])
}

/// Splits a tagged line into its four control values and the remaining text.
///
/// The line must start with exactly the four tokens in prefix order, each
/// followed by one space.
pub fn parse_prefix(tagged: &str) -> Result<(CtVector, &str)> {
    let mut rest = tagged;
    let mut values = [0.0; 4];
    for (slot, name) in values.iter_mut().zip(TOKEN_NAMES) {
        let body = rest
            .strip_prefix('<')
            .and_then(|r| r.strip_prefix(name))
            .and_then(|r| r.strip_prefix('_'))
            .ok_or_else(|| {
                Error::Protocol(format!("expected <{name}_x> at {:?}", truncate(rest, 40)))
            })?;
        let end = body
            .find("> ")
            .ok_or_else(|| Error::Protocol(format!("unterminated <{name}_...> token")))?;
        *slot = body[..end]
            .parse()
            .map_err(|_| Error::Protocol(format!("bad value in <{name}_{}>", &body[..end])))?;
        rest = &body[end + 2..];
    }
    let [dtd, wr, lv, lr] = values;
    Ok((CtVector { dtd, wr, lv, lr }, rest))
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
