use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use simpkit::agreement::{krippendorff_alpha, pairwise_kappa, AlphaMetric, AlphaQuery, Criterion, RatingTable};
use simpkit::metrics::sari;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn simpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simpkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let o = simpkit(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("search"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = simpkit(&["evaluate", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_corpus_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = simpkit(&[
        "evaluate",
        "--corpus",
        p(&dir.path().join("nope.tsv")),
        "--outputs",
        p(&fixture("identity_outputs.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn json_errors_carry_kind_and_code() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.txt");
    fs::write(&short, "only one line\n").unwrap();
    let o = simpkit(&[
        "--json-errors",
        "evaluate",
        "--corpus",
        p(&fixture("identity.tsv")),
        "--outputs",
        p(&short),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "data");
    assert_eq!(v["error"]["code"], 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("1 outputs for 3"));
}

#[test]
fn failing_subprocess_is_external_error() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.json");
    fs::write(&sim, r#"{"mode": "subprocess", "command": ["sh", "-c", "exit 7"]}"#).unwrap();
    let o = simpkit(&[
        "--json-errors",
        "search",
        "--strategy",
        "grid",
        "--corpus",
        p(&fixture("validation.tsv")),
        "--simplifier",
        p(&sim),
        "--dtd",
        "1.0",
        "--wr",
        "1.0",
        "--lv",
        "1.0",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "external");
}

#[test]
fn bad_config_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let o = simpkit(&["--config", p(&cfg), "compact-ratings", "--ratings", "x.jsonl"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn evaluate_identity_scores_hundred() {
    let o = simpkit(&[
        "evaluate",
        "--corpus",
        p(&fixture("identity.tsv")),
        "--outputs",
        p(&fixture("identity_outputs.txt")),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["bleu", "rouge1", "rouge2", "rougeL", "sari"] {
        assert!((v[key].as_f64().unwrap() - 100.0).abs() < 1e-9, "{key}: {}", v[key]);
    }

    let text = simpkit(&[
        "evaluate",
        "--corpus",
        p(&fixture("identity.tsv")),
        "--outputs",
        p(&fixture("identity_outputs.txt")),
    ]);
    let table = stdout(&text);
    assert!(table.contains("SARI"));
    assert!(table.contains("100.00"));
}

#[test]
fn split_writes_three_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = simpkit(&[
        "split",
        "--corpus",
        p(&fixture("validation.tsv")),
        "--ratios",
        "2:1:1",
        "--seed",
        "3",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap().lines().count();
    assert_eq!(lines("train.tsv") + lines("validation.tsv") + lines("test.tsv"), 4);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("split-manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 3);

    let again = tempfile::tempdir().unwrap();
    simpkit(&[
        "split",
        "--corpus",
        p(&fixture("validation.tsv")),
        "--ratios",
        "2:1:1",
        "--seed",
        "3",
        "--out",
        p(again.path()),
    ]);
    for f in ["train.tsv", "validation.tsv", "test.tsv"] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(again.path().join(f)).unwrap()
        );
    }
}

#[test]
fn annotate_ct_tags_every_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tagged.tsv");
    let o = simpkit(&[
        "annotate-ct",
        "--stage",
        "1",
        "--corpus",
        p(&fixture("ct.tsv")),
        "--conllu",
        p(&fixture("trees.conllu")),
        "--conllu-index",
        p(&fixture("trees.index")),
        "--frequency-table",
        p(&fixture("freq.txt")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with(
        "<DEPENDENCYTREEDEPTH_1.00> <WORDRANK_1.00> <REPLACEONLYLEVENSHTEIN_1.00> <LENGTHRATIO_1.00> the patient"
    ));
    assert!(!lines[1].contains("<LENGTHRATIO_1.00>"));
    let manifest = dir.path().join("tagged.tsv.manifest.json");
    let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["lines"], 2);
}

#[test]
fn annotate_ct_without_trees_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = simpkit(&[
        "annotate-ct",
        "--stage",
        "1",
        "--corpus",
        p(&fixture("ct.tsv")),
        "--frequency-table",
        p(&fixture("freq.txt")),
        "--out",
        p(&dir.path().join("t.tsv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn truncate(text: &str, lr: f64) -> String {
    let n = text.chars().count();
    let keep = (lr * n as f64 + 1e-9).floor() as usize;
    text.chars().take(keep).collect()
}

#[test]
fn grid_search_with_truncation_matches_oracle_per_lr() {
    let corpus = fs::read_to_string(fixture("validation.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = corpus.lines().map(|l| l.split('\t').collect()).collect();
    for lr in ["0.50", "0.70", "0.85", "1.00"] {
        let lr_val: f64 = lr.parse().unwrap();
        let expect = rows
            .iter()
            .map(|r| sari(r[0], &truncate(r[0], lr_val), &r[1..]).unwrap())
            .sum::<f64>()
            / rows.len() as f64;

        let dir = tempfile::tempdir().unwrap();
        let o = simpkit(&[
            "search",
            "--strategy",
            "grid",
            "--corpus",
            p(&fixture("validation.tsv")),
            "--builtin",
            "truncate_to_lr",
            "--lr",
            lr,
            "--dtd",
            "0.5,1.0",
            "--wr",
            "0.5,1.0",
            "--lv",
            "0.5,1.0",
            "--out",
            p(dir.path()),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let best: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("best.json")).unwrap()).unwrap();
        let got = best["candidate"]["score"].as_f64().unwrap();
        assert!((got - expect).abs() < 1e-9, "lr {lr}: {got} vs {expect}");
        assert_eq!(best["evaluations"], 8);
        let log = fs::read_to_string(dir.path().join("search-log.jsonl")).unwrap();
        assert_eq!(log.lines().count(), 8);
    }
}

#[test]
fn es_search_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let o = simpkit(&[
            "search",
            "--strategy",
            "es",
            "--corpus",
            p(&fixture("validation.tsv")),
            "--builtin",
            "lexical_sub",
            "--budget",
            "21",
            "--lambda",
            "4",
            "--seed",
            "9",
            "--out",
            p(dir.path()),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let best: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("best.json")).unwrap()).unwrap();
        (best["candidate"].clone(), best["seed"].clone())
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.1, 9);
}

#[test]
fn search_off_grid_value_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = simpkit(&[
        "search",
        "--strategy",
        "grid",
        "--corpus",
        p(&fixture("validation.tsv")),
        "--builtin",
        "identity",
        "--dtd",
        "0.33",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn fit_then_predict_lr() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let o = simpkit(&[
        "fit-lr",
        "--corpus",
        p(&fixture("train.tsv")),
        "--frequency-table",
        p(&fixture("freq.txt")),
        "--lambda",
        "1.0",
        "--out",
        p(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("lr.tsv");
    let o = simpkit(&[
        "predict-lr",
        "--model",
        p(&model),
        "--corpus",
        p(&fixture("validation.tsv")),
        "--frequency-table",
        p(&fixture("freq.txt")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for (i, l) in lines.iter().enumerate() {
        let cols: Vec<&str> = l.split('\t').collect();
        assert_eq!(cols[0], "tsv");
        assert_eq!(cols[1], i.to_string());
        let lr: f64 = cols[2].parse().unwrap();
        assert!((0.05..=2.0).contains(&lr), "{lr}");
    }

    // Too few examples for four features and an intercept.
    let tiny = dir.path().join("tiny.tsv");
    fs::write(&tiny, "a b c .\ta .\n").unwrap();
    let o = simpkit(&[
        "fit-lr",
        "--corpus",
        p(&tiny),
        "--frequency-table",
        p(&fixture("freq.txt")),
        "--out",
        p(&dir.path().join("m2.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn assign_writes_cycle_plan() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("items.tsv");
    let body: String = (0..8).map(|i| format!("source {i} .\tref {i} .\n")).collect();
    fs::write(&corpus, body).unwrap();
    let plan_path = dir.path().join("plan.json");
    let o = simpkit(&[
        "assign",
        "--corpus",
        p(&corpus),
        "--annotators",
        "a,b,c,d",
        "--systems",
        "x,y",
        "--seed",
        "5",
        "--out",
        p(&plan_path),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let plan: Value = serde_json::from_str(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(plan["load"], 4);
    for a in ["a", "b", "c", "d"] {
        assert_eq!(plan["tasks"][a].as_array().unwrap().len(), 4);
    }
    let overlaps: Vec<usize> = stdout(&o)
        .lines()
        .filter_map(|l| l.rsplit_once(": ").filter(|_| l.starts_with("overlap")))
        .map(|(_, n)| n.parse().unwrap())
        .collect();
    assert_eq!(overlaps.len(), 6);
    assert_eq!(overlaps.iter().filter(|&&n| n == 0).count(), 2);
    assert_eq!(overlaps.iter().filter(|&&n| n == 2).count(), 4);

    let bad = simpkit(&[
        "assign",
        "--corpus",
        p(&corpus),
        "--annotators",
        "a,b,c",
        "--systems",
        "x,y",
        "--load",
        "4",
        "--out",
        p(&plan_path),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("infeasible assignment"));
}

#[test]
fn agreement_json_matches_library() {
    let o = simpkit(&["agreement", "--ratings", p(&fixture("ratings.csv")), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let table = RatingTable::load(fixture("ratings.csv")).unwrap();

    let kappa = v["kappa"].as_array().unwrap();
    assert_eq!(kappa.len(), 4, "only the four neighbouring pairs overlap");
    for row in kappa {
        let a = row["annotators"][0].as_str().unwrap();
        let b = row["annotators"][1].as_str().unwrap();
        for c in Criterion::ALL {
            let lib = pairwise_kappa(&table, (a, b), c, ("bart_ct", "t5_base")).map(|k| k.kappa).ok();
            let cli = row[c.as_str()].as_f64();
            match (lib, cli) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => panic!("{a}&{b} {c}: {other:?}"),
            }
        }
    }
    for row in v["alpha"].as_array().unwrap() {
        let pair: Vec<String> = row["annotators"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
        for c in Criterion::ALL {
            let lib = krippendorff_alpha(
                &table,
                &AlphaQuery {
                    criterion: c,
                    system: Some(row["system"].as_str().unwrap().to_string()),
                    annotators: Some(pair.clone()),
                    metric: AlphaMetric::Ordinal,
                },
            )
            .ok();
            let cli = row[c.as_str()].as_f64();
            match (lib, cli) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => panic!("{pair:?} {c}: {other:?}"),
            }
        }
    }

    let text = stdout(&simpkit(&["agreement", "--ratings", p(&fixture("ratings.csv"))]));
    assert!(text.contains("Likert means"));
    assert!(text.contains("Cohen's kappa"));
    assert!(text.contains("Krippendorff's alpha"));
}

#[test]
fn agreement_rejects_out_of_range_rating() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(
        &path,
        "annotator,doc_id,sent_index,system,criterion,value\n0,d,0,a,simplicity,6\n0,d,0,b,simplicity,3\n",
    )
    .unwrap();
    let o = simpkit(&["agreement", "--ratings", p(&path)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compact_ratings_drops_torn_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.jsonl");
    let r = |sys: &str| {
        format!(
            r#"{{"annotator":"a","doc_id":"d","sent_index":0,"system":"{sys}","criterion":"simplicity","value":3}}"#
        )
    };
    fs::write(&path, format!("{}\n{}\n{{\"annotator\":\"a\",\"doc", r("y"), r("x"))).unwrap();
    let o = simpkit(&["compact-ratings", "--ratings", p(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 ratings kept"));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("\"x\""));
}
