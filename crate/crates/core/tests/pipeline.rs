//! Corpus to tagged file to objective, on the checked-in fixture corpus.

use std::fs;
use std::path::{Path, PathBuf};

use simpkit::bridge::BuiltinMock;
use simpkit::conllu::TreeIndex;
use simpkit::control_tokens::{annotate_corpus, parse_prefix, BucketSpec, FrequencyTable, Stage};
use simpkit::corpus::{load_corpus, split, CorpusFormat, SplitRatios};
use simpkit::metrics::sari;
use simpkit::search::{grid_search, GridOptions, LrMode, LrSource, SariObjective, SearchSpace};
use simpkit::Error;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn inputs() -> (simpkit::corpus::Corpus, TreeIndex, FrequencyTable) {
    (
        load_corpus(fixture("golden_corpus.json"), CorpusFormat::PlabaJson).unwrap(),
        TreeIndex::load(fixture("golden_trees.conllu"), fixture("golden_trees.index")).unwrap(),
        FrequencyTable::load(fixture("golden_freq.txt")).unwrap(),
    )
}

#[test]
fn tagged_file_matches_golden() {
    let (corpus, trees, table) = inputs();
    let tagged = annotate_corpus(&corpus, &trees, &table, &BucketSpec::default(), Stage::Stage2, 0.0).unwrap();
    let golden = fs::read_to_string(fixture("golden_tagged.tsv")).unwrap();
    assert_eq!(tagged.to_tsv(), golden);
    assert_eq!(tagged.manifest.lines, 4);
    assert_eq!(tagged.manifest.stage, Stage::Stage2);
    assert_eq!(tagged.manifest.frequency_table_sha256, table.checksum());

    let again = annotate_corpus(&corpus, &trees, &table, &BucketSpec::default(), Stage::Stage2, 0.0).unwrap();
    assert_eq!(tagged.to_tsv(), again.to_tsv());
}

#[test]
fn every_tagged_line_parses_back() {
    let (corpus, trees, table) = inputs();
    let tagged = annotate_corpus(&corpus, &trees, &table, &BucketSpec::default(), Stage::Stage1, 0.0).unwrap();
    let sources: Vec<&str> = corpus
        .pairs()
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.source.as_str(), p.references.len()))
        .collect();
    for ((line, _), source) in tagged.lines.iter().zip(sources) {
        let (ct, rest) = parse_prefix(line).unwrap();
        assert_eq!(rest, source);
        assert_eq!(ct.tag(source), *line);
    }
}

#[test]
fn missing_tree_fails_at_zero_tolerance_and_passes_above() {
    let (corpus, _, table) = inputs();
    let index: String = fs::read_to_string(fixture("golden_trees.index"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("d2\t0\tref-0"))
        .map(|l| format!("{l}\n"))
        .collect();
    let sentences = simpkit::conllu::parse_conllu_file(fixture("golden_trees.conllu")).unwrap();
    let trees = TreeIndex::from_sidecar(sentences, &index, "partial.index").unwrap();

    let err = annotate_corpus(&corpus, &trees, &table, &BucketSpec::default(), Stage::Stage1, 0.0).unwrap_err();
    assert!(matches!(err, Error::Integrity(ref m) if m.contains("1 of 4")), "{err}");

    let ok = annotate_corpus(&corpus, &trees, &table, &BucketSpec::default(), Stage::Stage1, 0.25).unwrap();
    assert_eq!(ok.lines.len(), 3);
    assert_eq!(ok.report.errors.len(), 1);
    assert_eq!(ok.report.errors[0].doc_id, "d2");
}

#[test]
fn split_keeps_every_pair_once() {
    let (corpus, _, _) = inputs();
    let result = split(&corpus, SplitRatios::EIGHT_ONE_ONE, 0).unwrap();
    let mut keys: Vec<(String, usize)> = [&result.train, &result.validation, &result.test]
        .iter()
        .flat_map(|part| part.iter().map(|p| (p.doc_id.clone(), p.sent_index)))
        .collect();
    keys.sort();
    assert_eq!(keys, [("d1".to_string(), 0), ("d1".to_string(), 1), ("d2".to_string(), 0)]);
}

#[test]
fn identity_objective_is_candidate_independent() {
    let (corpus, _, _) = inputs();
    let pairs = corpus.pairs();
    let mock = BuiltinMock::Identity;
    let objective = SariObjective::new(pairs, &mock, LrSource::Fixed(0.8)).unwrap();
    let space = SearchSpace::new(vec![0.5, 1.0], vec![0.5, 1.0], vec![0.5, 1.0], LrMode::Fixed(0.8)).unwrap();
    let outcome = grid_search(&space, &objective, &GridOptions::default()).unwrap();
    let expect = pairs.iter().map(|p| sari(&p.source, &p.source, &p.references).unwrap()).sum::<f64>() / pairs.len() as f64;
    for e in &outcome.log {
        assert!((e.candidate.score.unwrap() - expect).abs() < 1e-9);
    }
    assert_eq!((outcome.best.dtd, outcome.best.wr, outcome.best.lv), (0.5, 0.5, 0.5));
}
