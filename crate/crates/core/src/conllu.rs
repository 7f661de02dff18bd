//! CoNLL-U dependency trees and tree depth.
//!
//! Only the `ID`, `FORM`, `HEAD` and `DEPREL` columns are kept. Multiword
//! token ranges (`3-4`) and empty nodes (`3.1`) are skipped. Every sentence is
//! checked on parse: ids must run `1..=n`, heads must point at an existing
//! token or 0, at least one token must hang off the root, and the head links
//! must not form a cycle.
//!
//! ```
//! use simpkit::conllu::{parse_conllu, tree_depth};
//!
//! let text = "# sent_id = s1\n\
//!             1\tThe\t_\t_\t_\t_\t2\tdet\t_\t_\n\
//!             2\tcat\t_\t_\t_\t_\t3\tnsubj\t_\t_\n\
//!             3\tsat\t_\t_\t_\t_\t0\troot\t_\t_\n\n";
//! let sentences = parse_conllu(text)?;
//! assert_eq!(sentences[0].sent_id.as_deref(), Some("s1"));
//! assert_eq!(tree_depth(&sentences[0]), 3);
//! # Ok::<(), simpkit::Error>(())
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Locator, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepToken {
    pub id: usize,
    pub form: String,
    /// 0 attaches the token to the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepSentence {
    pub tokens: Vec<DepToken>,
    pub sent_id: Option<String>,
}

impl DepSentence {
    /// Checks the tree invariants and returns the sentence unchanged.
    pub fn new(tokens: Vec<DepToken>, sent_id: Option<String>) -> Result<Self> {
        let s = DepSentence { tokens, sent_id };
        s.validate()?;
        Ok(s)
    }

    fn name(&self) -> String {
        match &self.sent_id {
            Some(id) => format!("sentence {id:?}"),
            None => "sentence without sent_id".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::Integrity(format!("{} has no tokens", self.name())));
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(Error::Integrity(format!(
                    "{}: token ids are not contiguous (expected {}, found {})",
                    self.name(),
                    i + 1,
                    t.id
                )));
            }
            if t.head > n {
                return Err(Error::Integrity(format!(
                    "{}: token {} has head {} but the sentence has {n} tokens",
                    self.name(),
                    t.id,
                    t.head
                )));
            }
            if t.head == t.id {
                return Err(Error::Integrity(format!(
                    "{}: token {} is its own head",
                    self.name(),
                    t.id
                )));
            }
        }
        if !self.tokens.iter().any(|t| t.head == 0) {
            return Err(Error::Integrity(format!(
                "{} has no root-attached token",
                self.name()
            )));
        }
        // Every token must reach the root in at most n steps.
        for t in &self.tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(Error::Integrity(format!(
                        "{}: head cycle through token {}",
                        self.name(),
                        t.id
                    )));
                }
                cur = self.tokens[cur - 1].head;
            }
        }
        Ok(())
    }
}

enum LineId {
    Token(usize),
    Skip,
}

fn parse_id(cell: &str, at: &Locator) -> Result<LineId> {
    if cell.contains('-') || cell.contains('.') {
        return Ok(LineId::Skip);
    }
    cell.parse::<usize>()
        .ok()
        .filter(|&id| id >= 1)
        .map(LineId::Token)
        .ok_or_else(|| Error::parse(at.clone(), format!("bad token id {cell:?}")))
}

/// Parses every sentence in `text`.
pub fn parse_conllu(text: &str) -> Result<Vec<DepSentence>> {
    parse_conllu_named(text, "<conllu>")
}

pub fn parse_conllu_file(path: impl AsRef<Path>) -> Result<Vec<DepSentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu_named(&text, &path.display().to_string())
}

pub fn parse_conllu_named(text: &str, name: &str) -> Result<Vec<DepSentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<DepToken> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut in_sentence = false;

    let mut flush = |tokens: &mut Vec<DepToken>, sent_id: &mut Option<String>| -> Result<()> {
        let s = DepSentence::new(std::mem::take(tokens), sent_id.take())?;
        sentences.push(s);
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if in_sentence {
                flush(&mut tokens, &mut sent_id)?;
                in_sentence = false;
            }
            continue;
        }
        in_sentence = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let at = Locator::line(name, lineno + 1);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                at,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = match parse_id(cols[0], &at)? {
            LineId::Skip => continue,
            LineId::Token(id) => id,
        };
        let head = cols[6]
            .parse::<usize>()
            .map_err(|_| Error::parse(at.clone(), format!("bad head {:?}", cols[6])))?;
        tokens.push(DepToken {
            id,
            form: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    if in_sentence {
        flush(&mut tokens, &mut sent_id)?;
    }
    Ok(sentences)
}

fn cell(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

/// Writes sentences back out with `_` in every column that is not retained.
pub fn serialize_conllu(sentences: &[DepSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if let Some(id) = &s.sent_id {
            let _ = writeln!(out, "# sent_id = {id}");
        }
        for t in &s.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_",
                t.id,
                cell(&t.form),
                t.head,
                cell(&t.deprel)
            );
        }
        out.push('\n');
    }
    out
}

/// Length of the longest root-to-token path, counting the root-attached
/// token as depth 1.
pub fn tree_depth(sentence: &DepSentence) -> usize {
    let n = sentence.tokens.len();
    let mut depth = vec![0usize; n + 1];
    let mut best = 0;
    for start in 1..=n {
        let mut chain = Vec::new();
        let mut cur = start;
        while cur != 0 && depth[cur] == 0 {
            chain.push(cur);
            cur = sentence.tokens[cur - 1].head;
        }
        let mut d = if cur == 0 { 0 } else { depth[cur] };
        for &id in chain.iter().rev() {
            d += 1;
            depth[id] = d;
        }
        best = best.max(depth[start]);
    }
    best
}

/// Which side of a sentence pair a tree belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeRole {
    Source,
    Reference(usize),
}

impl std::str::FromStr for TreeRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "source" {
            return Ok(TreeRole::Source);
        }
        s.strip_prefix("ref-")
            .and_then(|k| k.parse().ok())
            .map(TreeRole::Reference)
            .ok_or_else(|| Error::config(format!("bad tree role {s:?}")))
    }
}

impl std::fmt::Display for TreeRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreeRole::Source => f.write_str("source"),
            TreeRole::Reference(k) => write!(f, "ref-{k}"),
        }
    }
}

/// Trees looked up by `(doc_id, sent_index, role)`.
#[derive(Debug, Clone, Default)]
pub struct TreeIndex {
    trees: HashMap<(String, usize, TreeRole), DepSentence>,
}

impl TreeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc_id: &str, sent_index: usize, role: TreeRole, tree: DepSentence) {
        self.trees.insert((doc_id.to_string(), sent_index, role), tree);
    }

    pub fn get(&self, doc_id: &str, sent_index: usize, role: TreeRole) -> Option<&DepSentence> {
        self.trees.get(&(doc_id.to_string(), sent_index, role))
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Joins parsed sentences with a sidecar index whose lines are
    /// `doc_id<TAB>sent_index<TAB>role<TAB>sent_id`, role being `source` or `ref-k`.
    pub fn from_sidecar(sentences: Vec<DepSentence>, index_text: &str, name: &str) -> Result<Self> {
        let mut by_id = HashMap::new();
        for s in sentences {
            if let Some(id) = s.sent_id.clone() {
                by_id.insert(id, s);
            }
        }
        let mut out = TreeIndex::new();
        for (lineno, line) in index_text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let at = Locator::line(name, lineno + 1);
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(at, "expected doc_id, sent_index, role, sent_id"));
            }
            let sent_index = cols[1]
                .parse()
                .map_err(|_| Error::parse(at.clone(), format!("bad sent_index {:?}", cols[1])))?;
            let role: TreeRole = cols[2]
                .parse()
                .map_err(|e: Error| Error::parse(at.clone(), e.to_string()))?;
            let tree = by_id.get(cols[3]).ok_or_else(|| {
                Error::Integrity(format!("{at}: unknown sent_id {:?}", cols[3]))
            })?;
            out.insert(cols[0], sent_index, role, tree.clone());
        }
        Ok(out)
    }

    pub fn load(conllu: impl AsRef<Path>, index: impl AsRef<Path>) -> Result<Self> {
        let sentences = parse_conllu_file(conllu)?;
        let index = index.as_ref();
        let text = fs::read_to_string(index).map_err(|e| Error::io(index, e))?;
        Self::from_sidecar(sentences, &text, &index.display().to_string())
    }
}
