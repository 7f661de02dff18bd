use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use super::predictor::{predict_lr, Features, PredictorModel};
use super::{Candidate, LrMode, Objective, Point};
use crate::bridge::Simplifier;
use crate::control_tokens::{BucketSpec, CtVector};
use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::metrics::{evaluate_system, EvalOptions, MetricSelection};

/// Where each validation sentence gets its LR value.
#[derive(Debug, Clone, PartialEq)]
pub enum LrSource {
    Fixed(f64),
    /// One bucketed value per validation sentence.
    PerSentence(Vec<f64>),
}

impl LrSource {
    /// Runs the predictor over per-sentence features.
    pub fn predicted(model: &PredictorModel, features: &[Features], spec: &BucketSpec) -> Result<Self> {
        features
            .iter()
            .map(|f| predict_lr(model, f, spec))
            .collect::<Result<Vec<_>>>()
            .map(LrSource::PerSentence)
    }

    fn at(&self, i: usize) -> f64 {
        match self {
            LrSource::Fixed(v) => *v,
            LrSource::PerSentence(v) => v[i],
        }
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            LrSource::Fixed(v) => (0u8, v.to_bits()).hash(&mut h),
            LrSource::PerSentence(v) => {
                1u8.hash(&mut h);
                for x in v {
                    x.to_bits().hash(&mut h);
                }
            }
        }
        h.finish()
    }
}

/// SARI on a validation set of the outputs a simplifier produces for tagged
/// sources. Scores are cached by point and LR assignment.
pub struct SariObjective<'a> {
    validation: &'a [SentencePair],
    simplifier: &'a dyn Simplifier,
    lr: LrSource,
    lr_key: u64,
    cache: Mutex<HashMap<([u64; 3], u64), f64>>,
}

impl<'a> SariObjective<'a> {
    pub fn new(validation: &'a [SentencePair], simplifier: &'a dyn Simplifier, lr: LrSource) -> Result<Self> {
        if validation.is_empty() {
            return Err(Error::domain("validation set is empty"));
        }
        if let LrSource::PerSentence(v) = &lr {
            if v.len() != validation.len() {
                return Err(Error::domain(format!(
                    "{} predicted LR values for {} validation pairs",
                    v.len(),
                    validation.len()
                )));
            }
        }
        let lr_key = lr.fingerprint();
        Ok(SariObjective {
            validation,
            simplifier,
            lr,
            lr_key,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn tagged_inputs(&self, p: &Point) -> Vec<String> {
        self.validation
            .iter()
            .enumerate()
            .map(|(i, pair)| {
                CtVector {
                    dtd: p.dtd,
                    wr: p.wr,
                    lv: p.lv,
                    lr: self.lr.at(i),
                }
                .tag(&pair.source)
            })
            .collect()
    }

    fn score(&self, p: &Point) -> Result<f64> {
        let outputs = self.simplifier.simplify_batch(&self.tagged_inputs(p))?;
        let report = evaluate_system(
            self.validation,
            &outputs,
            &EvalOptions {
                metrics: MetricSelection::SARI_ONLY,
                ..Default::default()
            },
        )?;
        report
            .sari
            .ok_or_else(|| Error::domain("SARI missing from the metric report"))
    }
}

impl Objective for SariObjective<'_> {
    fn evaluate(&self, p: &Point) -> Result<f64> {
        let key = (p.key(), self.lr_key);
        if let Some(s) = self.cache.lock().unwrap().get(&key) {
            return Ok(*s);
        }
        let s = self.score(p)?;
        self.cache.lock().unwrap().insert(key, s);
        Ok(s)
    }
}

/// Scores one candidate. `predictor` carries the model and per-sentence
/// features and must be given exactly when the candidate's LR is predicted.
pub fn objective(
    candidate: &Candidate,
    validation: &[SentencePair],
    simplifier: &dyn Simplifier,
    predictor: Option<(&PredictorModel, &[Features])>,
    spec: &BucketSpec,
) -> Result<f64> {
    let lr = match (candidate.lr_mode, predictor) {
        (LrMode::Fixed(v), None) => LrSource::Fixed(v),
        (LrMode::Predicted, Some((model, feats))) => LrSource::predicted(model, feats, spec)?,
        (LrMode::Fixed(_), Some(_)) => {
            return Err(Error::config("a predictor was given for a fixed-LR candidate"))
        }
        (LrMode::Predicted, None) => return Err(Error::config("predicted LR needs a predictor model")),
    };
    let point = candidate.point();
    SariObjective::new(validation, simplifier, lr)?
        .evaluate(&point)
        .map_err(|e| Error::Candidate {
            candidate: point.to_string(),
            source: Box::new(e),
        })
}
