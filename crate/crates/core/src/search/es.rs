use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{evaluate_points, Candidate, EvalCache, Evaluation, Objective, Point, SearchOutcome, SearchSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsOptions {
    /// Total proposals, counting the initial parent and every offspring.
    pub budget: usize,
    pub lambda: usize,
    pub seed: u64,
    pub parallelism: usize,
}

impl Default for EsOptions {
    fn default() -> Self {
        EsOptions {
            budget: 150,
            lambda: 5,
            seed: 0,
            parallelism: 1,
        }
    }
}

const MUTATION_PROB: f64 = 1.0 / 3.0;

fn mutate(idx: [usize; 3], lens: [usize; 3], rng: &mut ChaCha8Rng) -> [usize; 3] {
    let mut out = idx;
    for d in 0..3 {
        if lens[d] < 2 || !rng.gen_bool(MUTATION_PROB) {
            continue;
        }
        let up = rng.gen_bool(0.5);
        out[d] = match (up, idx[d]) {
            (false, 0) => 1,
            (false, i) => i - 1,
            (true, i) if i + 1 == lens[d] => i - 1,
            (true, i) => i + 1,
        };
    }
    out
}

/// Scores the points not already cached, then returns every point's score.
fn score_all(
    points: &[Point],
    objective: &dyn Objective,
    space: &SearchSpace,
    cache: &EvalCache,
    parallelism: usize,
    log: &mut Vec<Evaluation>,
) -> Result<Vec<f64>> {
    let mut fresh: Vec<Point> = Vec::new();
    for p in points {
        if cache.get(p).is_none() && !fresh.contains(p) {
            fresh.push(*p);
        }
    }
    for e in evaluate_points(&fresh, objective, space.lr_mode, parallelism)? {
        cache.insert(&e.candidate.point(), e.candidate.score.unwrap_or(f64::NEG_INFINITY));
        log.push(e);
    }
    Ok(points.iter().map(|p| cache.get(p).expect("scored above")).collect())
}

/// Seeded (1+λ) evolution strategy over the discrete grid.
///
/// The parent starts at a uniformly random cell. Each generation proposes λ
/// offspring; every coordinate moves one grid step up or down with
/// probability 1/3, reflecting at the ends. The best offspring (first on
/// ties) replaces the parent when it scores at least as well.
pub fn one_plus_lambda_es(
    space: &SearchSpace,
    objective: &dyn Objective,
    options: &EsOptions,
) -> Result<SearchOutcome> {
    let EsOptions { budget, lambda, seed, parallelism } = *options;
    if lambda == 0 {
        return Err(Error::config("lambda must be at least 1"));
    }
    if budget < 1 + lambda {
        return Err(Error::config(format!(
            "ES budget {budget} is below 1 + lambda = {}",
            1 + lambda
        )));
    }
    let axes = space.axes();
    let lens = [axes[0].len(), axes[1].len(), axes[2].len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = EvalCache::default();
    let mut log = Vec::new();

    let mut parent = [0, 1, 2].map(|d| rng.gen_range(0..lens[d]));
    let mut parent_score = score_all(
        &[space.point_at(parent)],
        objective,
        space,
        &cache,
        parallelism,
        &mut log,
    )?[0];

    let generations = (budget - 1) / lambda;
    for _ in 0..generations {
        let offspring: Vec<[usize; 3]> = (0..lambda).map(|_| mutate(parent, lens, &mut rng)).collect();
        let points: Vec<Point> = offspring.iter().map(|&i| space.point_at(i)).collect();
        let scores = score_all(&points, objective, space, &cache, parallelism, &mut log)?;
        let mut best = 0;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = i;
            }
        }
        if scores[best] >= parent_score {
            parent = offspring[best];
            parent_score = scores[best];
        }
    }

    Ok(SearchOutcome {
        best: Candidate::new(space.point_at(parent), space.lr_mode, Some(parent_score)),
        log,
    })
}
