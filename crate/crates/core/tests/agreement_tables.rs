mod common;

use std::sync::Arc;
use std::thread;

use common::{alpha_oracle, kappa_oracle, random_table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpkit::agreement::{
    assign_annotation, krippendorff_alpha, pairwise_kappa, AlphaMetric, AlphaQuery, Criterion, ItemId, Rating,
    RatingStore, RatingTable,
};
use simpkit::Error;

fn rating(annotator: &str, item: usize, system: &str, criterion: Criterion, value: u8) -> Rating {
    Rating {
        annotator: annotator.into(),
        doc_id: "doc".into(),
        sent_index: item,
        system: system.into(),
        criterion,
        value,
    }
}

/// A random table of `units` items rated by up to three annotators on one
/// system, as both a `RatingTable` and the oracle's matrix.
fn random_ratings(rng: &mut ChaCha8Rng) -> (RatingTable, Vec<Vec<Option<u8>>>) {
    let units = rng.gen_range(2..=6);
    let matrix = random_table(rng, units, 3, &[1, 2, 3, 4, 5], 0.3);
    let mut ratings = Vec::new();
    for (u, row) in matrix.iter().enumerate() {
        for (r, v) in row.iter().enumerate() {
            if let Some(v) = v {
                ratings.push(rating(&format!("r{r}"), u, "s", Criterion::Simplicity, *v));
            }
        }
    }
    (RatingTable::new(ratings).unwrap(), matrix)
}

#[test]
fn table_alpha_matches_coincidence_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut compared = 0;
    for _ in 0..400 {
        let (table, matrix) = random_ratings(&mut rng);
        for (metric, ordinal) in [(AlphaMetric::Nominal, false), (AlphaMetric::Ordinal, true)] {
            let q = AlphaQuery { criterion: Criterion::Simplicity, system: None, annotators: None, metric };
            let got = krippendorff_alpha(&table, &q).ok();
            let want = alpha_oracle(&matrix, ordinal);
            match (got, want) {
                (Some(g), Some(w)) => {
                    assert!((g - w).abs() < 1e-9, "{matrix:?}: {g} vs {w}");
                    compared += 1;
                }
                (None, None) => {}
                other => panic!("{matrix:?}: {other:?}"),
            }
        }
    }
    assert!(compared > 300);
}

#[test]
fn annotator_filter_drops_other_raters() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (table, matrix) = random_ratings(&mut rng);
        let two: Vec<Vec<Option<u8>>> = matrix.iter().map(|row| row[..2].to_vec()).collect();
        let q = AlphaQuery {
            criterion: Criterion::Simplicity,
            system: Some("s".into()),
            annotators: Some(vec!["r0".into(), "r1".into()]),
            metric: AlphaMetric::Ordinal,
        };
        let got = krippendorff_alpha(&table, &q).ok();
        let want = alpha_oracle(&two, true);
        match (got, want) {
            (Some(g), Some(w)) => assert!((g - w).abs() < 1e-9),
            (None, None) => {}
            other => panic!("{two:?}: {other:?}"),
        }
    }
}

#[test]
fn pairwise_kappa_matches_contingency_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.gen_range(2..15);
        let mut ratings = Vec::new();
        let mut outcomes = [Vec::new(), Vec::new()];
        for item in 0..n {
            for (k, ann) in ["x", "y"].iter().enumerate() {
                let a: u8 = rng.gen_range(1..=5);
                let b: u8 = rng.gen_range(1..=5);
                ratings.push(rating(ann, item, "A", Criterion::MeaningPreservation, a));
                ratings.push(rating(ann, item, "B", Criterion::MeaningPreservation, b));
                outcomes[k].push(a.cmp(&b));
            }
        }
        let table = RatingTable::new(ratings).unwrap();
        match pairwise_kappa(&table, ("x", "y"), Criterion::MeaningPreservation, ("A", "B")) {
            Ok(k) => {
                assert_eq!(k.items, n);
                let want = kappa_oracle(&outcomes[0], &outcomes[1]);
                assert!((k.kappa - want).abs() < 1e-12, "{} vs {want}", k.kappa);
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn csv_and_json_loaders_agree() {
    let csv = "annotator,doc_id,sent_index,system,criterion,value\n\
               a,d,0,s1,simplicity,4\n\
               a,d,0,s2,simplicity,2\n\
               b,d,0,s1,meaning_preservation,5\n";
    let from_csv = RatingTable::from_csv_str(csv, "r.csv").unwrap();
    let json = serde_json::to_string(from_csv.ratings()).unwrap();
    let from_json = RatingTable::from_json_str(&json, "r.json").unwrap();
    assert_eq!(from_csv.ratings(), from_json.ratings());
    assert_eq!(RatingTable::from_csv_str(&from_csv.to_csv(), "again").unwrap().ratings(), from_csv.ratings());
}

#[test]
fn concurrent_writers_never_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(RatingStore::open(dir.path().join("ratings.jsonl")).unwrap());
    // Eight threads race to store the same 20 batches.
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let store = store.clone();
            thread::spawn(move || {
                let mut stored = 0;
                let mut conflicts = 0;
                for item in 0..20 {
                    let batch = vec![
                        rating("a", item, "s1", Criterion::Simplicity, 3),
                        rating("a", item, "s2", Criterion::Simplicity, 4),
                    ];
                    match store.append(&batch) {
                        Ok(()) => stored += 1,
                        Err(Error::Conflict(_)) => conflicts += 1,
                        Err(e) => panic!("{e}"),
                    }
                }
                (stored, conflicts)
            })
        })
        .collect();
    let totals = handles.into_iter().map(|h| h.join().unwrap()).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert_eq!(totals, (20, 140));
    assert_eq!(store.len(), 40);

    drop(store);
    let reopened = RatingStore::open(dir.path().join("ratings.jsonl")).unwrap();
    assert_eq!(reopened.table().len(), 40);
}

#[test]
fn progress_reaches_full_after_every_item() {
    let dir = tempfile::tempdir().unwrap();
    let items: Vec<ItemId> = (0..4).map(|i| ItemId::new("doc", i)).collect();
    let names: Vec<String> = ["p", "q"].iter().map(|s| s.to_string()).collect();
    let plan = assign_annotation(&items, &names, ["s1".into(), "s2".into()], 4, 1).unwrap();
    let store = RatingStore::open(dir.path().join("r.jsonl")).unwrap();
    for item in &plan.tasks["p"] {
        let mut batch = Vec::new();
        for system in ["s1", "s2"] {
            for c in Criterion::ALL {
                batch.push(rating("p", item.sent_index, system, c, 3));
            }
        }
        store.append(&batch).unwrap();
    }
    let p = store.progress(&plan, "p").unwrap();
    assert_eq!(p.completed_items, p.total_items);
    assert_eq!(p.percent, 100.0);
    assert_eq!(p.records, 4 * p.total_items);
    assert_eq!(store.progress(&plan, "q").unwrap().completed_items, 0);
}
