//! Independent reference implementations used by the integration tests.
//! None of them call into the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

pub type Gram = Vec<String>;

pub fn grams(tokens: &[String], n: usize) -> BTreeSet<Gram> {
    let mut out = BTreeSet::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            out.insert(tokens[i..i + n].to_vec());
        }
    }
    out
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores a component whose candidate set is `cand` and target set `target`,
/// with the two-empty-sets conventions applied before `score` is called.
fn component(cand: usize, target: usize, score: impl FnOnce() -> f64) -> f64 {
    if cand == 0 && target == 0 {
        1.0
    } else if cand == 0 || target == 0 {
        0.0
    } else {
        score()
    }
}

/// SARI computed literally from the n-gram sets, in `[0, 100]`.
pub fn sari_oracle(source: &[String], output: &[String], refs: &[Vec<String>]) -> f64 {
    let mut total = 0.0;
    for n in 1..=4 {
        let s = grams(source, n);
        let o = grams(output, n);
        let ref_sets: Vec<BTreeSet<Gram>> = refs.iter().map(|r| grams(r, n)).collect();
        let weight = |g: &Gram| ref_sets.iter().filter(|r| r.contains(g)).count() as f64 / refs.len() as f64;

        let kept: Vec<&Gram> = s.iter().filter(|g| o.contains(*g)).collect();
        let keep_target: Vec<&Gram> = s.iter().filter(|g| weight(g) > 0.0).collect();
        let keep = component(kept.len(), keep_target.len(), || {
            let num: f64 = kept.iter().map(|g| weight(g)).sum();
            let p = num / kept.len() as f64;
            let r = num / keep_target.iter().map(|g| weight(g)).sum::<f64>();
            f1(p, r)
        });

        let deleted: Vec<&Gram> = s.iter().filter(|g| !o.contains(*g)).collect();
        let del_target: Vec<&Gram> = s.iter().filter(|g| weight(g) < 1.0).collect();
        let del = component(deleted.len(), del_target.len(), || {
            deleted.iter().map(|g| 1.0 - weight(g)).sum::<f64>() / deleted.len() as f64
        });

        let all_refs: BTreeSet<Gram> = ref_sets.iter().flatten().cloned().collect();
        let added: BTreeSet<&Gram> = o.iter().filter(|g| !s.contains(*g)).collect();
        let add_target: BTreeSet<&Gram> = all_refs.iter().filter(|g| !s.contains(*g)).collect();
        let add = component(added.len(), add_target.len(), || {
            let hit = added.iter().filter(|g| add_target.contains(*g)).count() as f64;
            f1(hit / added.len() as f64, hit / add_target.len() as f64)
        });

        total += (keep + add + del) / 3.0;
    }
    100.0 * total / 4.0
}

/// Longest common subsequence by plain recursion with memoization.
pub fn lcs_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() || j == b.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            1 + go(a, b, i + 1, j + 1, memo)
        } else {
            go(a, b, i + 1, j, memo).max(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// ROUGE-L F1 in `[0, 100]`, max over references.
pub fn rouge_l_oracle(output: &[String], refs: &[Vec<String>]) -> f64 {
    refs.iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let l = lcs_oracle(output, r) as f64;
            if l == 0.0 {
                0.0
            } else {
                f1(l / output.len() as f64, l / r.len() as f64)
            }
        })
        .fold(0.0, f64::max)
        * 100.0
}

/// Cohen's kappa from an explicit contingency table.
pub fn kappa_oracle<T: Ord + Clone>(a: &[T], b: &[T]) -> f64 {
    let labels: BTreeSet<T> = a.iter().chain(b).cloned().collect();
    let labels: Vec<T> = labels.into_iter().collect();
    let idx = |x: &T| labels.iter().position(|l| l == x).unwrap();
    let k = labels.len();
    let mut table = vec![vec![0.0; k]; k];
    for (x, y) in a.iter().zip(b) {
        table[idx(x)][idx(y)] += 1.0;
    }
    let n = a.len() as f64;
    let po: f64 = (0..k).map(|i| table[i][i]).sum::<f64>() / n;
    let pe: f64 = (0..k)
        .map(|i| {
            let row: f64 = table[i].iter().sum();
            let col: f64 = table.iter().map(|r| r[i]).sum();
            row * col
        })
        .sum::<f64>()
        / (n * n);
    if pe == 1.0 {
        1.0
    } else {
        (po - pe) / (1.0 - pe)
    }
}

/// Krippendorff's alpha from a literal coincidence matrix. `table[u][r]` is
/// rater `r`'s value for unit `u`, `None` when missing. Returns `None` when
/// alpha is undefined.
pub fn alpha_oracle(table: &[Vec<Option<u8>>], ordinal: bool) -> Option<f64> {
    let values: BTreeSet<u8> = table.iter().flatten().flatten().copied().collect();
    let values: Vec<u8> = values.into_iter().collect();
    let v = values.len();
    let pos = |x: u8| values.iter().position(|&y| y == x).unwrap();
    let mut o = vec![vec![0.0f64; v]; v];
    let mut pairable_units = 0;
    for unit in table {
        let present: Vec<u8> = unit.iter().flatten().copied().collect();
        let m = present.len();
        if m < 2 {
            continue;
        }
        pairable_units += 1;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    o[pos(present[i])][pos(present[j])] += 1.0 / (m as f64 - 1.0);
                }
            }
        }
    }
    if pairable_units < 2 {
        return None;
    }
    let nc: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = nc.iter().sum();
    let delta = |c: usize, k: usize| -> f64 {
        if c == k {
            return 0.0;
        }
        if !ordinal {
            return 1.0;
        }
        let (lo, hi) = (c.min(k), c.max(k));
        let s: f64 = (lo..=hi).map(|g| nc[g]).sum::<f64>() - (nc[c] + nc[k]) / 2.0;
        s * s
    };
    let mut dobs = 0.0;
    let mut dexp = 0.0;
    for c in 0..v {
        for k in 0..v {
            dobs += o[c][k] * delta(c, k);
            dexp += nc[c] * nc[k] * delta(c, k);
        }
    }
    if dexp == 0.0 {
        return None;
    }
    Some(1.0 - (n - 1.0) * dobs / dexp)
}

/// Keeps the first `⌊lr · chars⌋` characters.
pub fn truncate_chars(text: &str, lr: f64) -> String {
    let n = text.chars().count();
    let keep = (lr * n as f64 + 1e-9).floor() as usize;
    text.chars().take(keep).collect()
}

/// `f = −(dtd − 0.8)² − (wr − 0.7)² − (lv − 0.6)²`.
pub fn separable(dtd: f64, wr: f64, lv: f64) -> f64 {
    -(dtd - 0.8).powi(2) - (wr - 0.7).powi(2) - (lv - 0.6).powi(2)
}

pub fn random_tokens<R: Rng>(rng: &mut R, vocab: &[&str], max_len: usize) -> Vec<String> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| vocab.choose(rng).unwrap().to_string()).collect()
}

/// Random rating table with `units` rows and `raters` columns, values in
/// `1..=max_value`, each cell missing with probability `p_missing`.
pub fn random_table<R: Rng>(
    rng: &mut R,
    units: usize,
    raters: usize,
    values: &[u8],
    p_missing: f64,
) -> Vec<Vec<Option<u8>>> {
    (0..units)
        .map(|_| {
            (0..raters)
                .map(|_| if rng.gen_bool(p_missing) { None } else { Some(*values.choose(rng).unwrap()) })
                .collect()
        })
        .collect()
}

/// Counts how often each item appears across the lists.
pub fn coverage<'a, T: Ord + 'a>(lists: impl IntoIterator<Item = &'a Vec<T>>) -> BTreeMap<&'a T, usize> {
    let mut m = BTreeMap::new();
    for l in lists {
        for x in l {
            *m.entry(x).or_insert(0) += 1;
        }
    }
    m
}
