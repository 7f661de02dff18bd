use std::collections::HashSet;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ItemId;
use crate::error::{Error, Result};

/// The order in which one annotator sees the two systems' outputs for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayOrder {
    pub annotator: String,
    pub doc_id: String,
    pub sent_index: usize,
    /// `order[0]` is shown as "Output 1".
    pub order: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentPlan {
    pub seed: u64,
    pub load: usize,
    pub systems: [String; 2],
    /// How the plan was built.
    pub scheme: String,
    /// Annotators in cycle order; neighbours share `load / 2` items.
    pub cycle: Vec<String>,
    pub tasks: IndexMap<String, Vec<ItemId>>,
    pub display_order: Vec<DisplayOrder>,
}

impl AssignmentPlan {
    pub fn order_for(&self, annotator: &str, item: &ItemId) -> Option<&[String; 2]> {
        self.display_order
            .iter()
            .find(|d| d.annotator == annotator && d.doc_id == item.doc_id && d.sent_index == item.sent_index)
            .map(|d| &d.order)
    }

    /// Items shared by two annotators.
    pub fn overlap(&self, a: &str, b: &str) -> usize {
        let (Some(x), Some(y)) = (self.tasks.get(a), self.tasks.get(b)) else {
            return 0;
        };
        let x: HashSet<&ItemId> = x.iter().collect();
        y.iter().filter(|i| x.contains(i)).count()
    }
}

pub const CYCLE_SCHEME: &str = "random-cycle: shuffled items cut into blocks of load/2; block j goes to cycle[j] and cycle[j+1 mod k]";

/// Gives every item to exactly two annotators, each receiving `load` items.
///
/// Annotators are placed on a random cycle and the shuffled items are cut
/// into `k` blocks of `load / 2`; block `j` goes to cycle positions `j` and
/// `j + 1`. Each annotator's list is shuffled, and the two systems' display
/// order is drawn per `(annotator, item)`.
pub fn assign_annotation(
    items: &[ItemId],
    annotators: &[String],
    systems: [String; 2],
    load: usize,
    seed: u64,
) -> Result<AssignmentPlan> {
    let k = annotators.len();
    if k < 2 {
        return Err(Error::config("assignment needs at least 2 annotators"));
    }
    if items.len() * 2 != k * load {
        return Err(Error::config(format!(
            "infeasible assignment: 2 × {} items ≠ {k} annotators × load {load}",
            items.len()
        )));
    }
    if !load.is_multiple_of(2) {
        return Err(Error::config(format!("load must be even to split overlaps evenly, got {load}")));
    }
    if systems[0] == systems[1] {
        return Err(Error::config("the two compared systems must differ"));
    }
    if annotators.iter().collect::<HashSet<_>>().len() != k {
        return Err(Error::config("annotator ids must be distinct"));
    }
    if items.iter().collect::<HashSet<_>>().len() != items.len() {
        return Err(Error::config("item ids must be distinct"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cycle = annotators.to_vec();
    cycle.shuffle(&mut rng);
    let mut pool = items.to_vec();
    pool.shuffle(&mut rng);

    let mut tasks: IndexMap<String, Vec<ItemId>> = annotators.iter().map(|a| (a.clone(), Vec::new())).collect();
    for (j, block) in pool.chunks(load / 2).enumerate() {
        for who in [&cycle[j], &cycle[(j + 1) % k]] {
            tasks[who].extend(block.iter().cloned());
        }
    }
    let mut display_order = Vec::with_capacity(items.len() * 2);
    for (annotator, list) in tasks.iter_mut() {
        list.shuffle(&mut rng);
        for item in list.iter() {
            let order = if rng.gen_bool(0.5) {
                [systems[1].clone(), systems[0].clone()]
            } else {
                systems.clone()
            };
            display_order.push(DisplayOrder {
                annotator: annotator.clone(),
                doc_id: item.doc_id.clone(),
                sent_index: item.sent_index,
                order,
            });
        }
    }
    Ok(AssignmentPlan {
        seed,
        load,
        systems,
        scheme: CYCLE_SCHEME.to_string(),
        cycle,
        tasks,
        display_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn items(n: usize) -> Vec<ItemId> {
        (0..n).map(|i| ItemId::new(format!("doc{}", i / 10), i % 10)).collect()
    }

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| i.to_string()).collect()
    }

    fn systems() -> [String; 2] {
        ["bart_ct".to_string(), "t5_base".to_string()]
    }

    #[test]
    fn eighty_items_four_annotators() {
        let plan = assign_annotation(&items(80), &names(4), systems(), 40, 7).unwrap();
        let mut cover: HashMap<&ItemId, usize> = HashMap::new();
        for list in plan.tasks.values() {
            assert_eq!(list.len(), 40);
            for i in list {
                *cover.entry(i).or_default() += 1;
            }
        }
        assert_eq!(cover.len(), 80);
        assert!(cover.values().all(|&c| c == 2));
        let zero: Vec<_> = [("0", "1"), ("0", "2"), ("0", "3"), ("1", "2"), ("1", "3"), ("2", "3")]
            .into_iter()
            .filter(|(a, b)| plan.overlap(a, b) == 0)
            .collect();
        assert_eq!(zero.len(), 2);
        let c = &plan.cycle;
        assert_eq!(plan.overlap(&c[0], &c[2]), 0);
        assert_eq!(plan.overlap(&c[1], &c[3]), 0);
        assert_eq!(plan.overlap(&c[0], &c[1]), 20);
        assert_eq!(plan, assign_annotation(&items(80), &names(4), systems(), 40, 7).unwrap());
    }

    #[test]
    fn two_by_two() {
        let plan = assign_annotation(&items(2), &names(2), systems(), 2, 1).unwrap();
        for list in plan.tasks.values() {
            let mut l = list.clone();
            l.sort();
            assert_eq!(l, items(2));
        }
    }

    #[test]
    fn infeasible_arithmetic() {
        let err = assign_annotation(&items(80), &names(4), systems(), 30, 1).unwrap_err();
        assert!(err.to_string().contains("80 items"), "{err}");
        assert!(assign_annotation(&items(3), &names(2), systems(), 3, 1).is_err());
        assert!(assign_annotation(&items(2), &names(1), systems(), 4, 1).is_err());
    }

    proptest! {
        #[test]
        fn coverage_and_load_exact(k in 2usize..7, half in 1usize..6, seed in any::<u64>()) {
            let load = 2 * half;
            let n = k * half;
            let plan = assign_annotation(&items(n), &names(k), systems(), load, seed).unwrap();
            let total: usize = plan.tasks.values().map(Vec::len).sum();
            prop_assert_eq!(total, 2 * n);
            prop_assert!(plan.tasks.values().all(|l| l.len() == load));
            prop_assert_eq!(plan.display_order.len(), 2 * n);
            for d in &plan.display_order {
                let mut o = d.order.clone();
                o.sort();
                prop_assert_eq!(&o, &systems());
            }
        }
    }
}
