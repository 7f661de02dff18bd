use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use simpkit::bridge::SimplifierConfig;
use simpkit::conllu::TreeIndex;
use simpkit::control_tokens::{annotate_corpus, FrequencyTable, Stage};
use simpkit::corpus::{filter_one_to_zero, load_corpus, split as split_corpus, to_tsv, Corpus, CorpusFormat, SplitRatios};
use simpkit::metrics::{
    evaluate_system, load_jsonl, EmbeddedSentence, EmbeddingInputs, EvalOptions, MetricSelection,
    ReferenceEmbeddings,
};
use simpkit::search::predictor::{source_features, training_examples};
use simpkit::search::{
    fit_lr_predictor, grid_search, one_plus_lambda_es, predict_lr as predict_one, Candidate, EsOptions, GridOptions,
    LrMode, LrSource, PredictorModel, SariObjective, SearchOutcome, SearchSpace,
};
use simpkit::{Error, Result};

use crate::config::RunConfig;
use crate::{CorpusArgs, MetricsArg, Strategy, TreeArgs};

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub(crate) fn load_corpus_args(args: &CorpusArgs, cfg: &RunConfig) -> Result<Corpus> {
    let path = args
        .corpus
        .clone()
        .or_else(|| cfg.corpus.clone())
        .ok_or_else(|| Error::config("no corpus given (use --corpus or the config's \"corpus\")"))?;
    let format = args.format.or(cfg.corpus_format).unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => CorpusFormat::PlabaJson,
            _ => CorpusFormat::Tsv,
        }
    });
    load_corpus(&path, format)
}

fn frequency_table(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<FrequencyTable> {
    let path = flag
        .or_else(|| cfg.frequency_table.clone())
        .ok_or_else(|| Error::config("no frequency table given (use --frequency-table)"))?;
    FrequencyTable::load(path)
}

fn trees(args: &TreeArgs, cfg: &RunConfig) -> Result<Option<TreeIndex>> {
    let conllu = args.conllu.clone().or_else(|| cfg.conllu.clone());
    let index = args.conllu_index.clone().or_else(|| cfg.conllu_index.clone());
    match (conllu, index) {
        (Some(c), Some(i)) => TreeIndex::load(c, i).map(Some),
        (None, None) => Ok(None),
        _ => Err(Error::config("--conllu and --conllu-index must be given together")),
    }
}

pub(crate) fn split(
    cfg: &RunConfig,
    corpus: &CorpusArgs,
    ratios: Option<SplitRatios>,
    seed: Option<u64>,
    drop_empty: bool,
    out: &Path,
) -> Result<()> {
    let mut data = load_corpus_args(corpus, cfg)?;
    if drop_empty {
        data = filter_one_to_zero(data);
    }
    let ratios = match ratios {
        Some(r) => r,
        None => match &cfg.split.ratios {
            Some(s) => s.parse()?,
            None => SplitRatios::EIGHT_ONE_ONE,
        },
    };
    let seed = seed.or(cfg.split.seed).unwrap_or(0);
    let result = split_corpus(&data, ratios, seed)?;
    write_file(&out.join("train.tsv"), to_tsv(&result.train))?;
    write_file(&out.join("validation.tsv"), to_tsv(&result.validation))?;
    write_file(&out.join("test.tsv"), to_tsv(&result.test))?;
    let manifest = result.manifest();
    write_file(&out.join("split-manifest.json"), to_json_pretty(&manifest))?;
    println!(
        "train {}  validation {}  test {}  (seed {seed})",
        manifest.counts.train, manifest.counts.validation, manifest.counts.test
    );
    if result.shortfall != (0, 0) {
        log::warn!(
            "multi-reference pool too small: validation short by {}, test short by {}",
            result.shortfall.0,
            result.shortfall.1
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn annotate(
    cfg: &RunConfig,
    stage: u8,
    corpus: &CorpusArgs,
    tree_args: &TreeArgs,
    table: Option<PathBuf>,
    out: &Path,
    manifest: Option<PathBuf>,
    max_error_rate: Option<f64>,
) -> Result<()> {
    let data = load_corpus_args(corpus, cfg)?;
    let table = frequency_table(table, cfg)?;
    let trees = trees(tree_args, cfg)?.ok_or_else(|| Error::config("annotate-ct needs --conllu and --conllu-index"))?;
    let stage = if stage == 1 { Stage::Stage1 } else { Stage::Stage2 };
    let rate = max_error_rate.or(cfg.max_error_rate).unwrap_or(0.0);
    let tagged = annotate_corpus(&data, &trees, &table, &cfg.bucket_spec(), stage, rate)?;
    for e in &tagged.report.errors {
        log::warn!("({}, {}, ref-{}): {}", e.doc_id, e.sent_index, e.ref_index, e.message);
    }
    write_file(out, tagged.to_tsv())?;
    let manifest_path = manifest.unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".manifest.json");
        PathBuf::from(p)
    });
    write_file(&manifest_path, to_json_pretty(&tagged.manifest))?;
    println!(
        "{}: {} tagged lines, {} errors",
        stage, tagged.manifest.lines, tagged.manifest.errors
    );
    Ok(())
}

pub(crate) fn evaluate(
    cfg: &RunConfig,
    corpus: &CorpusArgs,
    outputs: &Path,
    metrics: MetricsArg,
    per_sentence: bool,
    embeddings: Option<(PathBuf, PathBuf)>,
    json: bool,
) -> Result<()> {
    let data = load_corpus_args(corpus, cfg)?;
    let text = fs::read_to_string(outputs).map_err(|e| Error::io(outputs, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let embeddings = match embeddings.or_else(|| cfg.embeddings.clone().map(|e| (e.outputs, e.references))) {
        Some((o, r)) => Some(EmbeddingInputs {
            outputs: load_jsonl::<EmbeddedSentence>(o)?,
            references: load_jsonl::<ReferenceEmbeddings>(r)?,
        }),
        None => None,
    };
    let options = EvalOptions {
        metrics: match metrics {
            MetricsArg::All => MetricSelection::ALL,
            MetricsArg::Sari => MetricSelection::SARI_ONLY,
        },
        per_sentence,
        embeddings,
    };
    let report = evaluate_system(data.pairs(), &lines, &options)?;
    if json {
        print!("{}", to_json_pretty(&report));
        return Ok(());
    }
    print!("{report}");
    if let Some(rows) = &report.per_sentence {
        println!();
        println!("doc_id\tsent_index\tSARI\tROUGE-L");
        for r in rows {
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
            println!("{}\t{}\t{}\t{}", r.doc_id, r.sent_index, cell(r.sari), cell(r.rouge_l));
        }
    }
    Ok(())
}

pub(crate) struct SearchArgs {
    pub strategy: Strategy,
    pub corpus: CorpusArgs,
    pub simplifier: Option<PathBuf>,
    pub builtin: Option<String>,
    pub lr: Option<f64>,
    pub predictor: Option<PathBuf>,
    pub frequency_table: Option<PathBuf>,
    pub trees: TreeArgs,
    pub axes: [Option<Vec<f64>>; 3],
    pub budget: Option<usize>,
    pub lambda: Option<usize>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub max_evaluations: Option<usize>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BestRecord<'a> {
    strategy: &'static str,
    candidate: &'a Candidate,
    evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    space: &'a SearchSpace,
}

fn simplifier_config(args: &SearchArgs, cfg: &RunConfig) -> Result<SimplifierConfig> {
    if let Some(path) = &args.simplifier {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())));
    }
    if let Some(name) = &args.builtin {
        return Ok(SimplifierConfig::builtin(name));
    }
    cfg.simplifier
        .clone()
        .ok_or_else(|| Error::config("no simplifier given (use --simplifier, --builtin or the config)"))
}

fn predictor_features(
    pairs: &Corpus,
    table: &FrequencyTable,
    trees: Option<&TreeIndex>,
) -> Vec<simpkit::search::Features> {
    pairs
        .pairs()
        .iter()
        .map(|p| {
            let tree = trees.and_then(|t| t.get(&p.doc_id, p.sent_index, simpkit::conllu::TreeRole::Source));
            source_features(&p.source, table, tree)
        })
        .collect()
}

pub(crate) fn search(cfg: &RunConfig, args: SearchArgs) -> Result<()> {
    let spec = cfg.bucket_spec();
    let validation = load_corpus_args(&args.corpus, cfg)?;
    let sim_cfg = simplifier_config(&args, cfg)?;
    let predictor_path = args.predictor.clone().or_else(|| cfg.predictor.clone());
    let lr_mode = match (args.lr, &args.predictor, cfg.search.lr_mode) {
        (Some(v), _, _) => LrMode::Fixed(v),
        (None, Some(_), _) => LrMode::Predicted,
        (None, None, Some(mode)) => mode,
        (None, None, None) if predictor_path.is_some() => LrMode::Predicted,
        (None, None, None) => LrMode::Fixed(1.0),
    };

    let s = &cfg.search;
    let cfg_axes = [&s.dtd_values, &s.wr_values, &s.lv_values];
    let [dtd, wr, lv] = [0, 1, 2].map(|i| {
        args.axes[i]
            .clone()
            .or_else(|| cfg_axes[i].clone())
            .unwrap_or_else(|| spec.grid())
    });
    let space = SearchSpace::new(dtd, wr, lv, lr_mode)?;
    space.check_on_grid(&spec)?;

    let lr = match lr_mode {
        LrMode::Fixed(v) => LrSource::Fixed(v),
        LrMode::Predicted => {
            let path = predictor_path.ok_or_else(|| Error::config("predicted LR needs --predictor"))?;
            let model = PredictorModel::load(path)?;
            let table = frequency_table(args.frequency_table.clone(), cfg)?;
            let trees = trees(&args.trees, cfg)?;
            let feats = predictor_features(&validation, &table, trees.as_ref());
            LrSource::predicted(&model, &feats, &spec)?
        }
    };

    let simplifier = sim_cfg.build()?;
    let objective = SariObjective::new(validation.pairs(), &*simplifier, lr)?;
    let parallelism = args.parallelism.or(s.parallelism).unwrap_or(1);
    let (outcome, seed): (SearchOutcome, Option<u64>) = match args.strategy {
        Strategy::Grid => {
            let opts = GridOptions {
                max_evaluations: args.max_evaluations.or(s.max_evaluations).unwrap_or(GridOptions::default().max_evaluations),
                parallelism,
            };
            (grid_search(&space, &objective, &opts)?, None)
        }
        Strategy::Es => {
            let d = EsOptions::default();
            let opts = EsOptions {
                budget: args.budget.or(s.budget).unwrap_or(d.budget),
                lambda: args.lambda.or(s.lambda).unwrap_or(d.lambda),
                seed: args.seed.or(s.seed).unwrap_or(d.seed),
                parallelism,
            };
            (one_plus_lambda_es(&space, &objective, &opts)?, Some(opts.seed))
        }
    };

    let mut log = String::new();
    for e in &outcome.log {
        log.push_str(&serde_json::to_string(e).expect("evaluation serializes"));
        log.push('\n');
    }
    write_file(&args.out.join("search-log.jsonl"), log)?;
    let best = BestRecord {
        strategy: match args.strategy {
            Strategy::Grid => "grid",
            Strategy::Es => "es",
        },
        candidate: &outcome.best,
        evaluations: outcome.log.len(),
        seed,
        space: &space,
    };
    write_file(&args.out.join("best.json"), to_json_pretty(&best))?;
    println!(
        "best {} SARI {:.4} after {} evaluations",
        outcome.best.point(),
        outcome.best.score.unwrap_or(f64::NAN),
        outcome.log.len()
    );
    Ok(())
}

pub(crate) fn fit_lr(
    cfg: &RunConfig,
    corpus: &CorpusArgs,
    table: Option<PathBuf>,
    tree_args: &TreeArgs,
    lambda: f64,
    out: &Path,
) -> Result<()> {
    let data = load_corpus_args(corpus, cfg)?;
    let table = frequency_table(table, cfg)?;
    let trees = trees(tree_args, cfg)?;
    let examples = training_examples(data.pairs(), &table, trees.as_ref())?;
    let model = fit_lr_predictor(&examples, lambda)?;
    write_file(out, to_json_pretty(&model))?;
    println!("fitted on {} examples, intercept {:.4}", examples.len(), model.intercept);
    Ok(())
}

pub(crate) fn predict_lr(
    cfg: &RunConfig,
    model: Option<PathBuf>,
    corpus: &CorpusArgs,
    table: Option<PathBuf>,
    tree_args: &TreeArgs,
    out: Option<PathBuf>,
) -> Result<()> {
    let path = model
        .or_else(|| cfg.predictor.clone())
        .ok_or_else(|| Error::config("no predictor model given (use --model)"))?;
    let model = PredictorModel::load(path)?;
    let data = load_corpus_args(corpus, cfg)?;
    let table = frequency_table(table, cfg)?;
    let trees = trees(tree_args, cfg)?;
    let spec = cfg.bucket_spec();
    let feats = predictor_features(&data, &table, trees.as_ref());
    let mut text = String::new();
    for (p, f) in data.pairs().iter().zip(&feats) {
        let lr = predict_one(&model, f, &spec)?;
        text.push_str(&format!("{}\t{}\t{lr:.2}\n", p.doc_id, p.sent_index));
    }
    match out {
        Some(path) => write_file(&path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
