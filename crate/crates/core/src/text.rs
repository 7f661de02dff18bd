//! Whitespace normalization and the tokenizers shared by every module.
//!
//! Two tokenizers exist and they are deliberately different:
//!
//! * [`metric_tokens`] feeds SARI, BLEU and ROUGE. It lowercases and splits
//!   leading and trailing punctuation off into tokens of their own, so
//!   `"mat."` becomes `["mat", "."]`.
//! * [`lexical_words`] feeds the word-rank ratio. Edge punctuation is
//!   dropped entirely, since a frequency table has no entry for `"."`.
//!
//! ```
//! use simpkit::text::{normalize_whitespace, metric_tokens, lexical_words};
//!
//! assert_eq!(normalize_whitespace("  a b \t\n c "), "a b c");
//! assert_eq!(metric_tokens("The (cat) sat."), ["the", "(", "cat", ")", "sat", "."]);
//! assert_eq!(lexical_words("The (cat) sat."), ["the", "cat", "sat"]);
//! ```

/// Trim both ends and collapse every internal whitespace run to one space.
pub fn normalize_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Lowercased tokens with leading/trailing punctuation split into
/// single-character tokens.
pub fn metric_tokens(s: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in s.split_whitespace() {
        let lower = chunk.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        let start = chars
            .iter()
            .position(|&c| !is_edge_punct(c))
            .unwrap_or(chars.len());
        let end = chars
            .iter()
            .rposition(|&c| !is_edge_punct(c))
            .map(|i| i + 1)
            .unwrap_or(start);
        tokens.extend(chars[..start].iter().map(|c| c.to_string()));
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        tokens.extend(chars[end.max(start)..].iter().map(|c| c.to_string()));
    }
    tokens
}

/// Lowercased whitespace tokens with edge punctuation stripped; tokens that
/// are pure punctuation disappear.
pub fn lexical_words(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.to_lowercase().trim_matches(is_edge_punct).to_string())
        .filter(|w| !w.is_empty())
        .collect()
}
