//! JSON run configuration for the `experiment` command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::data::SynthSpec;
use crate::error::{Error, Result};
use crate::evaluation::{ExperimentOptions, HorizontalRanking, Setting};
use crate::rankers::{LaplacianParams, Method, MrmrParams, RankerConfig, ReliefParams};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    Files {
        data: PathBuf,
        manifest: PathBuf,
    },
    Synth {
        spec: SynthSpec,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        name: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingChoice {
    Horizontal,
    Vertical,
    #[default]
    Both,
}

impl SettingChoice {
    pub fn settings(&self) -> Vec<Setting> {
        match self {
            SettingChoice::Horizontal => vec![Setting::Horizontal],
            SettingChoice::Vertical => vec![Setting::Vertical],
            SettingChoice::Both => vec![Setting::Horizontal, Setting::Vertical],
        }
    }
}

/// Classifier hyperparameters shared by every classifier kind in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub lda_ridge: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        let d = ClassifierSpec::default();
        Self {
            knn_k: d.knn_k,
            tree_max_depth: d.tree_max_depth,
            tree_min_leaf: d.tree_min_leaf,
            lda_ridge: d.lda_ridge,
        }
    }
}

impl ClassifierParams {
    pub fn spec(&self, kind: ClassifierKind) -> ClassifierSpec {
        ClassifierSpec {
            kind,
            knn_k: self.knn_k,
            tree_max_depth: self.tree_max_depth,
            tree_min_leaf: self.tree_min_leaf,
            lda_ridge: self.lda_ridge,
        }
    }
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn all_classifiers() -> Vec<ClassifierKind> {
    ClassifierKind::ALL.to_vec()
}

fn default_split() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub setting: SettingChoice,
    #[serde(default = "all_classifiers")]
    pub classifiers: Vec<ClassifierKind>,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub relief: ReliefParams,
    #[serde(default)]
    pub mrmr: MrmrParams,
    #[serde(default)]
    pub laplacian: LaplacianParams,
    #[serde(default)]
    pub classifier: ClassifierParams,
    #[serde(default)]
    pub sweep_row_cap: Option<usize>,
    #[serde(default)]
    pub horizontal_ranking: HorizontalRanking,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSource::Files { data, manifest } = &mut config.dataset {
            resolve(data);
            resolve(manifest);
        }
        if let Some(out) = &mut config.output_dir {
            resolve(out);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if self.classifiers.is_empty() {
            return fail("at least one classifier is required".into());
        }
        if has_duplicates(&self.methods) {
            return fail("methods are listed more than once".into());
        }
        if has_duplicates(&self.classifiers) {
            return fail("classifiers are listed more than once".into());
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return fail(format!("split_fraction must lie in (0, 1), got {}", self.split_fraction));
        }
        if self.sweep_row_cap == Some(0) {
            return fail("sweep_row_cap must be positive".into());
        }
        for kind in &self.classifiers {
            self.classifier.spec(*kind).validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn options(&self) -> ExperimentOptions {
        ExperimentOptions {
            split_fraction: self.split_fraction,
            seed: self.seed,
            sweep_row_cap: self.sweep_row_cap,
            horizontal_ranking: self.horizontal_ranking,
        }
    }

    /// Ranker for `method`. Its `seed` field is mixed with the run seed, so
    /// one run seed reproduces the whole experiment.
    pub fn ranker(&self, method: Method) -> RankerConfig {
        let stream = |s: u64| derive_seed(self.seed, s ^ ((method as u64 + 1) << 56));
        match method {
            Method::Relief => RankerConfig::Relief(ReliefParams {
                seed: stream(self.relief.seed),
                ..self.relief.clone()
            }),
            Method::Mrmr => RankerConfig::Mrmr(self.mrmr.clone()),
            Method::Laplacian => RankerConfig::Laplacian(LaplacianParams {
                seed: stream(self.laplacian.seed),
                ..self.laplacian.clone()
            }),
        }
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, a)| items[..i].contains(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let json = r#"{"dataset": {"files": {"data": "d.csv", "manifest": "d.json"}}}"#;
        let c: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.methods.len(), 3);
        assert_eq!(c.classifiers.len(), 3);
        assert_eq!(c.setting, SettingChoice::Both);
        assert_eq!(c.split_fraction, 0.7);
        assert_eq!(c.classifier.knn_k, 3);
        c.validate().unwrap();
    }

    #[test]
    fn synth_dataset_and_unknown_fields() {
        let json = r#"{"dataset": {"synth": {"spec": {"samples_per_trial": 10, "channel_count": 4,
            "trials_per_class": 2, "class_count": 2}, "seed": 3}}, "methods": ["mrmr"]}"#;
        let c: RunConfig = serde_json::from_str(json).unwrap();
        assert!(matches!(c.dataset, DatasetSource::Synth { seed: 3, .. }));
        let bad = r#"{"dataset": {"files": {"data": "a", "manifest": "b"}}, "colour": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let json = r#"{"dataset": {"files": {"data": "d.csv", "manifest": "d.json"}}}"#;
        let base: RunConfig = serde_json::from_str(json).unwrap();
        let mut c = base.clone();
        c.methods.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base.clone();
        c.split_fraction = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.classifiers = vec![ClassifierKind::Knn, ClassifierKind::Knn];
        assert!(c.validate().is_err());
        let mut c = base;
        c.classifier.knn_k = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn ranker_seed_follows_run_seed() {
        let json = r#"{"dataset": {"files": {"data": "d.csv", "manifest": "d.json"}}, "seed": 1}"#;
        let a: RunConfig = serde_json::from_str(json).unwrap();
        let mut b = a.clone();
        b.seed = 2;
        assert_ne!(a.ranker(Method::Relief), b.ranker(Method::Relief));
        assert_eq!(a.ranker(Method::Relief), a.clone().ranker(Method::Relief));
        assert_ne!(a.ranker(Method::Relief).params_json(), a.ranker(Method::Laplacian).params_json());
    }
}
