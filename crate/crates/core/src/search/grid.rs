use super::{evaluate_points, Candidate, Objective, SearchOutcome, SearchSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    /// Refuse spaces with more points than this.
    pub max_evaluations: usize,
    pub parallelism: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            max_evaluations: 1000,
            parallelism: 1,
        }
    }
}

/// Scores every point and returns the best, the lexicographically smallest
/// `(dtd, wr, lv)` among ties.
pub fn grid_search(
    space: &SearchSpace,
    objective: &dyn Objective,
    options: &GridOptions,
) -> Result<SearchOutcome> {
    let size = space.size();
    if size > options.max_evaluations {
        return Err(Error::config(format!(
            "grid needs {size} evaluations ({}×{}×{}) but the budget cap is {}",
            space.dtd_values.len(),
            space.wr_values.len(),
            space.lv_values.len(),
            options.max_evaluations
        )));
    }
    let log = evaluate_points(&space.points(), objective, space.lr_mode, options.parallelism)?;
    let mut best: Option<&Candidate> = None;
    for e in &log {
        // Strict comparison keeps the first (smallest) point among ties.
        if best.is_none_or(|b| e.candidate.score > b.score) {
            best = Some(&e.candidate);
        }
    }
    let best = best.cloned().expect("search space is never empty");
    Ok(SearchOutcome { best, log })
}
