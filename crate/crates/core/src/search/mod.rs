//! Choosing control values on a validation set.
//!
//! DTD, WR and LV get one static value each, found by black-box search over
//! the bucket grid: exhaustive [`grid_search`] or a seeded
//! [`one_plus_lambda_es`]. LR is either fixed or predicted per sentence by a
//! ridge regression model ([`predictor`]).
//!
//! ```
//! use simpkit::search::{grid_search, GridOptions, LrMode, Point, SearchSpace};
//!
//! let space = SearchSpace::new(
//!     vec![0.6, 0.8, 1.0],
//!     vec![0.6, 0.7, 0.8],
//!     vec![0.5, 0.6, 0.7],
//!     LrMode::Fixed(1.0),
//! )?;
//! let f = |p: &Point| -> simpkit::Result<f64> {
//!     Ok(-(p.dtd - 0.8).powi(2) - (p.wr - 0.7).powi(2) - (p.lv - 0.6).powi(2))
//! };
//! let outcome = grid_search(&space, &f, &GridOptions::default())?;
//! assert_eq!(outcome.best.point(), Point { dtd: 0.8, wr: 0.7, lv: 0.6 });
//! # Ok::<(), simpkit::Error>(())
//! ```

mod es;
mod grid;
mod objective;
pub mod predictor;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::control_tokens::BucketSpec;
use crate::error::{Error, Result};

pub use es::{one_plus_lambda_es, EsOptions};
pub use grid::{grid_search, GridOptions};
pub use objective::{objective, LrSource, SariObjective};
pub use predictor::{fit_lr_predictor, predict_lr, Features, PredictorModel, RidgeProblem};

/// How the length-ratio token is filled in during search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrMode {
    Fixed(f64),
    Predicted,
}

/// The three statically searched control values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub dtd: f64,
    pub wr: f64,
    pub lv: f64,
}

impl Point {
    pub(crate) fn key(&self) -> [u64; 3] {
        [self.dtd.to_bits(), self.wr.to_bits(), self.lv.to_bits()]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(dtd {:.2}, wr {:.2}, lv {:.2})", self.dtd, self.wr, self.lv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dtd_values: Vec<f64>,
    pub wr_values: Vec<f64>,
    pub lv_values: Vec<f64>,
    pub lr_mode: LrMode,
}

fn sorted_unique(mut v: Vec<f64>, name: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::config(format!("{name} value list is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(format!("{name} values must be finite")));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

impl SearchSpace {
    /// Value lists are sorted ascending and deduplicated.
    pub fn new(dtd: Vec<f64>, wr: Vec<f64>, lv: Vec<f64>, lr_mode: LrMode) -> Result<Self> {
        Ok(SearchSpace {
            dtd_values: sorted_unique(dtd, "dtd")?,
            wr_values: sorted_unique(wr, "wr")?,
            lv_values: sorted_unique(lv, "lv")?,
            lr_mode,
        })
    }

    /// Full bucket grid on every searched axis.
    pub fn from_spec(spec: &BucketSpec, lr_mode: LrMode) -> Result<Self> {
        let g = spec.grid();
        Self::new(g.clone(), g.clone(), g, lr_mode)
    }

    /// Errors if any value is off the bucket grid.
    pub fn check_on_grid(&self, spec: &BucketSpec) -> Result<()> {
        for (name, vals) in self.axes_named() {
            if let Some(v) = vals.iter().find(|&&v| !spec.contains(v)) {
                return Err(Error::config(format!("{name} value {v} is not on the bucket grid")));
            }
        }
        if let LrMode::Fixed(v) = self.lr_mode {
            if !spec.contains(v) {
                return Err(Error::config(format!("fixed LR {v} is not on the bucket grid")));
            }
        }
        Ok(())
    }

    fn axes_named(&self) -> [(&'static str, &[f64]); 3] {
        [
            ("dtd", &self.dtd_values),
            ("wr", &self.wr_values),
            ("lv", &self.lv_values),
        ]
    }

    pub(crate) fn axes(&self) -> [&[f64]; 3] {
        [&self.dtd_values, &self.wr_values, &self.lv_values]
    }

    pub fn size(&self) -> usize {
        self.dtd_values.len() * self.wr_values.len() * self.lv_values.len()
    }

    pub(crate) fn point_at(&self, idx: [usize; 3]) -> Point {
        Point {
            dtd: self.dtd_values[idx[0]],
            wr: self.wr_values[idx[1]],
            lv: self.lv_values[idx[2]],
        }
    }

    /// Every point in lexicographic `(dtd, wr, lv)` order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.size());
        for i in 0..self.dtd_values.len() {
            for j in 0..self.wr_values.len() {
                for k in 0..self.lv_values.len() {
                    out.push(self.point_at([i, j, k]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub dtd: f64,
    pub wr: f64,
    pub lv: f64,
    pub lr_mode: LrMode,
    pub score: Option<f64>,
}

impl Candidate {
    pub fn new(point: Point, lr_mode: LrMode, score: Option<f64>) -> Self {
        Candidate {
            dtd: point.dtd,
            wr: point.wr,
            lv: point.lv,
            lr_mode,
            score,
        }
    }

    pub fn point(&self) -> Point {
        Point {
            dtd: self.dtd,
            wr: self.wr,
            lv: self.lv,
        }
    }
}

/// A black-box function of the three searched values; higher is better.
pub trait Objective: Sync {
    fn evaluate(&self, point: &Point) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    fn evaluate(&self, point: &Point) -> Result<f64> {
        self(point)
    }
}

/// One line of `search-log.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub candidate: Candidate,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Candidate,
    /// Real (uncached) evaluations in the order they were requested.
    pub log: Vec<Evaluation>,
}

/// Memo of objective values keyed by point; safe to share across threads.
#[derive(Debug, Default)]
pub(crate) struct EvalCache {
    scores: Mutex<HashMap<[u64; 3], f64>>,
}

impl EvalCache {
    pub(crate) fn get(&self, p: &Point) -> Option<f64> {
        self.scores.lock().unwrap().get(&p.key()).copied()
    }

    pub(crate) fn insert(&self, p: &Point, score: f64) {
        self.scores.lock().unwrap().insert(p.key(), score);
    }
}

/// Scores `points` on a pool of `parallelism` threads; results come back in
/// input order whatever the completion order.
pub(crate) fn evaluate_points(
    points: &[Point],
    objective: &dyn Objective,
    lr_mode: LrMode,
    parallelism: usize,
) -> Result<Vec<Evaluation>> {
    use rayon::prelude::*;
    let eval_one = |p: &Point| -> Result<Evaluation> {
        let start = Instant::now();
        let score = objective.evaluate(p).map_err(|e| match e {
            e @ Error::Candidate { .. } => e,
            e => Error::Candidate {
                candidate: p.to_string(),
                source: Box::new(e),
            },
        })?;
        Ok(Evaluation {
            candidate: Candidate::new(*p, lr_mode, Some(score)),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    };
    if parallelism <= 1 {
        return points.iter().map(eval_one).collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?
        .install(|| points.par_iter().map(eval_one).collect())
}
