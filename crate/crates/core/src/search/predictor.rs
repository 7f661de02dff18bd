//! Per-sentence length-ratio prediction with closed-form ridge regression.
//!
//! Features are standardized before the solve and the means and scales are
//! stored in the model, so predictions take raw feature values.
//!
//! ```
//! use indexmap::IndexMap;
//! use simpkit::control_tokens::BucketSpec;
//! use simpkit::search::{fit_lr_predictor, predict_lr};
//!
//! let examples: Vec<(IndexMap<String, f64>, f64)> = (0..5)
//!     .map(|i| {
//!         let x = i as f64;
//!         (IndexMap::from([("x".to_string(), x)]), 0.1 * x + 0.5)
//!     })
//!     .collect();
//! let model = fit_lr_predictor(&examples, 0.0)?;
//! assert!((model.weights[0] - 0.1).abs() < 1e-10);
//! let lr = predict_lr(&model, &IndexMap::from([("x".to_string(), 3.1)]), &BucketSpec::default())?;
//! assert_eq!(lr, 0.80);
//! # Ok::<(), simpkit::Error>(())
//! ```

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conllu::{tree_depth, DepSentence, TreeIndex, TreeRole};
use crate::control_tokens::{bucketize, length_ratio, BucketSpec, FrequencyTable};
use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::text::{lexical_words, normalize_whitespace};

/// Named feature values for one source sentence.
pub type Features = IndexMap<String, f64>;

pub const DEFAULT_FEATURES: [&str; 4] = ["source_chars", "source_tokens", "mean_log_rank", "tree_depth"];

/// Smallest eigenvalue ratio of the standardized Gram matrix accepted at λ = 0.
const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Weights on the raw (unstandardized) features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub ridge_lambda: f64,
}

impl PredictorModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.feature_names.len();
        if self.weights.len() != n || self.means.len() != n || self.scales.len() != n {
            return Err(Error::Integrity(format!(
                "predictor has {n} feature names but {} weights, {} means, {} scales",
                self.weights.len(),
                self.means.len(),
                self.scales.len()
            )));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::Integrity("ridge_lambda must be non-negative".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: PredictorModel = serde_json::from_str(&text).map_err(|e| {
            Error::parse(crate::error::Locator::new(path.display().to_string()), e.to_string())
        })?;
        model.validate()?;
        Ok(model)
    }

    /// Unbucketed linear prediction. Extra features are ignored.
    pub fn predict_raw(&self, features: &Features) -> Result<f64> {
        let mut y = self.intercept;
        for (name, w) in self.feature_names.iter().zip(&self.weights) {
            let x = features
                .get(name)
                .ok_or_else(|| Error::domain(format!("missing feature {name:?}")))?;
            y += w * x;
        }
        Ok(y)
    }
}

/// Fits `y ≈ x·w + b` by ridge regression. The penalty applies to the
/// weights of the standardized features; the intercept is not penalized.
pub fn fit_lr_predictor(examples: &[(Features, f64)], ridge_lambda: f64) -> Result<PredictorModel> {
    if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
        return Err(Error::config(format!("ridge lambda must be non-negative, got {ridge_lambda}")));
    }
    let Some((first, _)) = examples.first() else {
        return Err(Error::domain("no training examples"));
    };
    let names: Vec<String> = first.keys().cloned().collect();
    let p = names.len();
    let n = examples.len();
    if n < p + 1 {
        return Err(Error::domain(format!(
            "{n} examples cannot fit {p} features and an intercept"
        )));
    }
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut y = DVector::<f64>::zeros(n);
    for (i, (feats, target)) in examples.iter().enumerate() {
        if feats.len() != p {
            return Err(Error::domain(format!(
                "example {i} has {} features, expected {p}",
                feats.len()
            )));
        }
        for (j, name) in names.iter().enumerate() {
            x[(i, j)] = *feats
                .get(name)
                .ok_or_else(|| Error::domain(format!("example {i} is missing feature {name:?}")))?;
        }
        y[i] = *target;
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::domain("training data contains non-finite values"));
    }

    let y_mean = y.mean();
    if p == 0 {
        return Ok(PredictorModel {
            feature_names: names,
            means: vec![],
            scales: vec![],
            weights: vec![],
            intercept: y_mean,
            ridge_lambda,
        });
    }

    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col = x.column(j);
        let m = col.mean();
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        means.push(m);
        scales.push(if sd > 0.0 { sd } else { 1.0 });
    }
    let mut z = x;
    for j in 0..p {
        for i in 0..n {
            z[(i, j)] = (z[(i, j)] - means[j]) / scales[j];
        }
    }
    let yc = y.add_scalar(-y_mean);

    let mut gram = z.transpose() * &z;
    let rhs = z.transpose() * yc;
    if ridge_lambda == 0.0 {
        let eig = gram.clone().symmetric_eigen().eigenvalues;
        let max = eig.iter().cloned().fold(0.0, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 || min / max < SINGULAR_RATIO {
            return Err(Error::domain(
                "feature matrix is singular at lambda = 0 (collinear or constant features); set lambda > 0",
            ));
        }
    }
    for j in 0..p {
        gram[(j, j)] += ridge_lambda;
    }
    let w_std = gram
        .cholesky()
        .ok_or_else(|| Error::domain("ridge system is not positive definite; set lambda > 0"))?
        .solve(&rhs);

    let weights: Vec<f64> = (0..p).map(|j| w_std[j] / scales[j]).collect();
    let intercept = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(PredictorModel {
        feature_names: names,
        means,
        scales,
        weights,
        intercept,
        ridge_lambda,
    })
}

/// Linear prediction snapped to the bucket grid.
pub fn predict_lr(model: &PredictorModel, features: &Features, spec: &BucketSpec) -> Result<f64> {
    Ok(bucketize(model.predict_raw(features)?, spec))
}

/// The fitted objective, written in raw-feature coordinates.
///
/// Parameters are the weights followed by the intercept. The value is
/// `Σ (x·w + b − y)² + λ Σ (w_j · scale_j)²`.
#[derive(Debug, Clone)]
pub struct RidgeProblem<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub lambda: f64,
    pub scales: Vec<f64>,
}

impl RidgeProblem<'_> {
    pub fn value(&self, params: &[f64]) -> f64 {
        let (w, b) = params.split_at(params.len() - 1);
        let rss: f64 = self
            .x
            .iter()
            .zip(self.y)
            .map(|(row, y)| (dot(row, w) + b[0] - y).powi(2))
            .sum();
        let pen: f64 = w.iter().zip(&self.scales).map(|(w, s)| (w * s).powi(2)).sum();
        rss + self.lambda * pen
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let (w, b) = params.split_at(params.len() - 1);
        let mut g = vec![0.0; params.len()];
        for (row, y) in self.x.iter().zip(self.y) {
            let r = dot(row, w) + b[0] - y;
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += 2.0 * r * xj;
            }
            g[w.len()] += 2.0 * r;
        }
        for (j, s) in self.scales.iter().enumerate() {
            g[j] += 2.0 * self.lambda * w[j] * s * s;
        }
        g
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// Default features of a source sentence; `tree_depth` is 0 without a tree.
pub fn source_features(source: &str, table: &FrequencyTable, tree: Option<&DepSentence>) -> Features {
    let norm = normalize_whitespace(source);
    let words = lexical_words(&norm);
    let mean_log_rank = if words.is_empty() {
        0.0
    } else {
        words.iter().map(|w| table.log_rank(w)).sum::<f64>() / words.len() as f64
    };
    let values = [
        norm.chars().count() as f64,
        norm.split(' ').filter(|t| !t.is_empty()).count() as f64,
        mean_log_rank,
        tree.map_or(0.0, |t| tree_depth(t) as f64),
    ];
    DEFAULT_FEATURES
        .iter()
        .zip(values)
        .map(|(n, v)| (n.to_string(), v))
        .collect()
}

/// Training rows: default features of each source and the mean raw length
/// ratio over its non-empty references. Pairs without one are skipped.
pub fn training_examples(
    pairs: &[SentencePair],
    table: &FrequencyTable,
    trees: Option<&TreeIndex>,
) -> Result<Vec<(Features, f64)>> {
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let refs: Vec<&String> = p.references.iter().filter(|r| !r.trim().is_empty()).collect();
        if refs.is_empty() {
            continue;
        }
        let mut sum = 0.0;
        for r in &refs {
            sum += length_ratio(&p.source, r)?;
        }
        let tree = trees.and_then(|t| t.get(&p.doc_id, p.sent_index, TreeRole::Source));
        out.push((source_features(&p.source, table, tree), sum / refs.len() as f64));
    }
    Ok(out)
}
