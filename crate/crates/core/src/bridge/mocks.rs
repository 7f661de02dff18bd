//! In-process stand-ins for a fine-tuned simplifier. Each one reads the four
//! control tokens off the front of its input.

use std::collections::BTreeMap;

use super::Simplifier;
use crate::control_tokens::parse_prefix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinMock {
    /// Returns the input with the control tokens removed.
    Identity,
    /// Keeps the first `⌊LR · len⌋` characters of the de-tagged input.
    TruncateToLr,
    /// Replaces whole words found in the dictionary.
    LexicalSub(BTreeMap<String, String>),
}

/// Dictionary used by `lexical_sub` when none is configured.
pub fn default_substitutions() -> BTreeMap<String, String> {
    [
        ("utilize", "use"),
        ("administer", "give"),
        ("approximately", "about"),
        ("demonstrate", "show"),
        ("commence", "start"),
        ("myocardial", "heart"),
        ("hypertension", "high blood pressure"),
        ("placebo", "sugar pill"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// The three built-in mocks, in a fixed order.
pub fn builtin_mocks() -> [(&'static str, BuiltinMock); 3] {
    [
        ("identity", BuiltinMock::Identity),
        ("truncate_to_lr", BuiltinMock::TruncateToLr),
        ("lexical_sub", BuiltinMock::LexicalSub(default_substitutions())),
    ]
}

impl BuiltinMock {
    pub fn by_name(name: &str) -> Result<Self> {
        builtin_mocks()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown builtin simplifier {name:?} (identity, truncate_to_lr, lexical_sub)"
                ))
            })
    }

    pub fn apply(&self, input: &str) -> Result<String> {
        let (ct, text) = parse_prefix(input)?;
        Ok(match self {
            BuiltinMock::Identity => text.to_string(),
            BuiltinMock::TruncateToLr => {
                let n = text.chars().count();
                let keep = (ct.lr * n as f64 + 1e-9).floor().max(0.0) as usize;
                text.chars().take(keep).collect()
            }
            BuiltinMock::LexicalSub(dict) => text
                .split(' ')
                .map(|w| {
                    let core = w.trim_end_matches(|c: char| !c.is_alphanumeric());
                    match dict.get(&core.to_lowercase()) {
                        Some(rep) => format!("{rep}{}", &w[core.len()..]),
                        None => w.to_string(),
                    }
                })
                .collect::<Vec<_>>()
                .join(" "),
        })
    }
}

impl Simplifier for BuiltinMock {
    fn simplify_batch(&self, inputs: &[String]) -> Result<Vec<String>> {
        inputs.iter().map(|i| self.apply(i)).collect()
    }
}
