use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use simpkit::agreement::{
    assign_annotation, krippendorff_alpha, likert_means, pairwise_kappa, AlphaMetric, AlphaQuery, Criterion,
    ItemId, RatingStore, RatingTable,
};
use simpkit::{Error, Result};

use crate::commands::{load_corpus_args, to_json_pretty, write_file};
use crate::config::RunConfig;
use crate::CorpusArgs;

fn two_systems(list: Vec<String>) -> Result<[String; 2]> {
    <[String; 2]>::try_from(list).map_err(|l| Error::config(format!("expected exactly 2 systems, got {}", l.len())))
}

pub(crate) fn assign(
    cfg: &RunConfig,
    corpus: &CorpusArgs,
    annotators: Option<Vec<String>>,
    systems: Option<Vec<String>>,
    load: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let data = load_corpus_args(corpus, cfg)?;
    let items: Vec<ItemId> = data.pairs().iter().map(|p| ItemId::new(p.doc_id.clone(), p.sent_index)).collect();
    let annotators = annotators
        .or_else(|| cfg.annotation.annotators.clone())
        .ok_or_else(|| Error::config("no annotators given (use --annotators)"))?;
    let systems = match systems {
        Some(s) => two_systems(s)?,
        None => cfg
            .annotation
            .systems
            .clone()
            .ok_or_else(|| Error::config("no systems given (use --systems a,b)"))?,
    };
    let load = match load.or(cfg.annotation.load) {
        Some(l) => l,
        None if !annotators.is_empty() => 2 * items.len() / annotators.len(),
        None => 0,
    };
    let seed = seed.or(cfg.annotation.seed).unwrap_or(0);
    let plan = assign_annotation(&items, &annotators, systems, load, seed)?;
    write_file(out, to_json_pretty(&plan))?;
    println!("{} items, {} annotators, load {load}, seed {seed}", items.len(), annotators.len());
    let names: Vec<&String> = plan.tasks.keys().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            println!("overlap {a} & {b}: {}", plan.overlap(a, b));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MeanRow {
    system: String,
    meaning_preservation: Option<f64>,
    simplicity: Option<f64>,
}

#[derive(Debug, Serialize)]
struct KappaRow {
    annotators: [String; 2],
    meaning_preservation: Option<f64>,
    simplicity: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AlphaRow {
    annotators: [String; 2],
    system: String,
    meaning_preservation: Option<f64>,
    simplicity: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AgreementReport {
    systems: [String; 2],
    means: Vec<MeanRow>,
    kappa: Vec<KappaRow>,
    alpha: Vec<AlphaRow>,
}

/// Annotator pairs that rated at least one item in common.
fn overlapping_pairs(table: &RatingTable) -> Vec<[String; 2]> {
    let names: Vec<&str> = table.annotators().into_iter().collect();
    let items_of = |a: &str| -> BTreeSet<ItemId> {
        table.ratings().iter().filter(|r| r.annotator == a).map(|r| r.item()).collect()
    };
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        let ia = items_of(a);
        for b in &names[i + 1..] {
            if !ia.is_disjoint(&items_of(b)) {
                out.push([a.to_string(), b.to_string()]);
            }
        }
    }
    out
}

fn build_report(table: &RatingTable, systems: [String; 2]) -> AgreementReport {
    let means_map = likert_means(table);
    let mean = |s: &str, c: Criterion| means_map.get(&(s.to_string(), c)).copied();
    let means = systems
        .iter()
        .map(|s| MeanRow {
            system: s.clone(),
            meaning_preservation: mean(s, Criterion::MeaningPreservation),
            simplicity: mean(s, Criterion::Simplicity),
        })
        .collect();

    let pairs = overlapping_pairs(table);
    let kappa_of = |pair: &[String; 2], c: Criterion| {
        pairwise_kappa(table, (&pair[0], &pair[1]), c, (&systems[0], &systems[1]))
            .map(|k| k.kappa)
            .ok()
    };
    let kappa = pairs
        .iter()
        .map(|p| KappaRow {
            annotators: p.clone(),
            meaning_preservation: kappa_of(p, Criterion::MeaningPreservation),
            simplicity: kappa_of(p, Criterion::Simplicity),
        })
        .collect();

    let alpha_of = |pair: &[String; 2], system: &str, c: Criterion| {
        krippendorff_alpha(
            table,
            &AlphaQuery {
                criterion: c,
                system: Some(system.to_string()),
                annotators: Some(pair.to_vec()),
                metric: AlphaMetric::Ordinal,
            },
        )
        .ok()
    };
    let mut alpha = Vec::new();
    for p in &pairs {
        for s in &systems {
            alpha.push(AlphaRow {
                annotators: p.clone(),
                system: s.clone(),
                meaning_preservation: alpha_of(p, s, Criterion::MeaningPreservation),
                simplicity: alpha_of(p, s, Criterion::Simplicity),
            });
        }
    }
    AgreementReport { systems, means, kappa, alpha }
}

fn cell(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.3}"))
}

fn render(report: &AgreementReport) -> String {
    let mut s = String::new();
    let w = report.systems.iter().map(String::len).max().unwrap_or(6).max(6);
    let _ = writeln!(s, "Likert means");
    let _ = writeln!(s, "{:<w$}  {:>20}  {:>10}", "system", "meaning_preservation", "simplicity");
    for r in &report.means {
        let _ = writeln!(s, "{:<w$}  {:>20}  {:>10}", r.system, cell(r.meaning_preservation), cell(r.simplicity));
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Cohen's kappa over win/lose/tie ({} vs {})",
        report.systems[0], report.systems[1]
    );
    let _ = writeln!(s, "{:<10}  {:>20}  {:>10}", "annotators", "meaning_preservation", "simplicity");
    for r in &report.kappa {
        let pair = format!("{} & {}", r.annotators[0], r.annotators[1]);
        let _ = writeln!(s, "{pair:<10}  {:>20}  {:>10}", cell(r.meaning_preservation), cell(r.simplicity));
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Krippendorff's alpha (ordinal)");
    let _ = writeln!(s, "{:<10}  {:<w$}  {:>20}  {:>10}", "annotators", "system", "meaning_preservation", "simplicity");
    for r in &report.alpha {
        let pair = format!("{} & {}", r.annotators[0], r.annotators[1]);
        let _ = writeln!(
            s,
            "{pair:<10}  {:<w$}  {:>20}  {:>10}",
            r.system,
            cell(r.meaning_preservation),
            cell(r.simplicity)
        );
    }
    s
}

pub(crate) fn agreement(ratings: &Path, systems: Option<Vec<String>>, json: bool) -> Result<()> {
    let table = RatingTable::load(ratings)?;
    let systems = match systems {
        Some(s) => two_systems(s)?,
        None => two_systems(table.systems().into_iter().map(str::to_string).collect())?,
    };
    let report = build_report(&table, systems);
    if json {
        print!("{}", to_json_pretty(&report));
    } else {
        print!("{}", render(&report));
    }
    Ok(())
}

pub(crate) fn compact(ratings: &Path) -> Result<()> {
    let kept = RatingStore::compact(ratings)?;
    println!("{kept} ratings kept");
    Ok(())
}
