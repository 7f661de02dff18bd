//! JSON run configuration. Every field is optional; command-line flags take
//! precedence. Relative paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use simpkit::bridge::SimplifierConfig;
use simpkit::control_tokens::BucketSpec;
use simpkit::corpus::CorpusFormat;
use simpkit::error::Locator;
use simpkit::search::LrMode;
use simpkit::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<CorpusFormat>,
    pub conllu: Option<PathBuf>,
    pub conllu_index: Option<PathBuf>,
    pub frequency_table: Option<PathBuf>,
    pub embeddings: Option<EmbeddingPaths>,
    pub bucket: Option<BucketSpec>,
    pub search: SearchConfig,
    pub simplifier: Option<SimplifierConfig>,
    pub split: SplitConfig,
    pub annotation: AnnotationConfig,
    pub predictor: Option<PathBuf>,
    pub max_error_rate: Option<f64>,
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingPaths {
    pub outputs: PathBuf,
    pub references: PathBuf,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub dtd_values: Option<Vec<f64>>,
    pub wr_values: Option<Vec<f64>>,
    pub lv_values: Option<Vec<f64>>,
    pub lr_mode: Option<LrMode>,
    pub max_evaluations: Option<usize>,
    pub budget: Option<usize>,
    pub lambda: Option<usize>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratios: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub load: Option<usize>,
    pub seed: Option<u64>,
    pub annotators: Option<Vec<String>>,
    pub systems: Option<[String; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub port: Option<u16>,
    pub data_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", Locator::line(path.display().to_string(), e.line()))))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn paths_mut(&mut self) -> Vec<&mut PathBuf> {
        let mut out: Vec<&mut PathBuf> = [
            &mut self.corpus,
            &mut self.conllu,
            &mut self.conllu_index,
            &mut self.frequency_table,
            &mut self.predictor,
        ]
        .into_iter()
        .flatten()
        .collect();
        if let Some(e) = &mut self.embeddings {
            out.push(&mut e.outputs);
            out.push(&mut e.references);
        }
        if let Some(s) = &mut self.simplifier {
            if let Some(p) = &mut s.prompt_template {
                out.push(p);
            }
        }
        out
    }

    fn resolve(&mut self, base: &Path) {
        for p in self.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&mut self.serve.data_dir, &mut self.serve.static_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Checks that referenced input files exist and numeric settings are sane.
    pub fn validate(&mut self) -> Result<()> {
        for p in self.paths_mut() {
            if !p.exists() {
                return Err(Error::config(format!("configured file {} does not exist", p.display())));
            }
        }
        if let Some(b) = &self.bucket {
            b.validate()?;
        }
        if let Some(s) = &self.simplifier {
            s.validate()?;
        }
        if let Some(r) = &self.split.ratios {
            r.parse::<simpkit::corpus::SplitRatios>()?;
        }
        if let Some(rate) = self.max_error_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("max_error_rate must be in [0, 1], got {rate}")));
            }
        }
        Ok(())
    }

    pub fn bucket_spec(&self) -> BucketSpec {
        self.bucket.unwrap_or_default()
    }
}
