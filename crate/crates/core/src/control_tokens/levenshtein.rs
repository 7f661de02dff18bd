//! Character edit distance that also reports how many of the edits are
//! substitutions.
//!
//! Several minimum-cost alignments usually exist and they can disagree on the
//! number of substitutions. The table here orders cells by `(cost, -subs)`,
//! so among all minimum-cost alignments it keeps one with the most
//! substitutions. That is what a diagonal-first backtrace aims for, but unlike
//! a backtrace it does not depend on argument order.

/// Minimum edit distance and the substitution count of the chosen alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub distance: usize,
    pub substitutions: usize,
}

pub fn align(a: &[char], b: &[char]) -> Alignment {
    // (cost, substitutions) for the prefix pair; better = lower cost, then more subs.
    let better = |x: (usize, usize), y: (usize, usize)| {
        if x.0 != y.0 {
            x.0 < y.0
        } else {
            x.1 > y.1
        }
    };
    let m = b.len();
    let mut prev: Vec<(usize, usize)> = (0..=m).map(|j| (j, 0)).collect();
    let mut cur = vec![(0, 0); m + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = (i + 1, 0);
        for (j, &cb) in b.iter().enumerate() {
            let diag = if ca == cb {
                prev[j]
            } else {
                (prev[j].0 + 1, prev[j].1 + 1)
            };
            let up = (prev[j + 1].0 + 1, prev[j + 1].1);
            let left = (cur[j].0 + 1, cur[j].1);
            let mut best = diag;
            for cand in [up, left] {
                if better(cand, best) {
                    best = cand;
                }
            }
            cur[j + 1] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (distance, substitutions) = prev[m];
    Alignment {
        distance,
        substitutions,
    }
}
