//! `key=value` run configuration. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use testlens::ml::{ClassifierKind, ClassifierSpec};
use testlens::model::MetricId;
use testlens::pipeline::PipelineConfig;
use testlens::ranking::RankingAlgorithm;
use testlens::stats::Population;
use testlens::Error;

/// Keys accepted in a config file.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "dataset",
    "src",
    "classes",
    "pairs",
    "out",
    "features",
    "classifier",
    "k",
    "threshold",
    "population",
    "model",
    "thresholds",
    "require_nbi",
    "ranking",
    "top",
    "dt.min_leaf",
    "dt.max_depth",
    "rf.trees",
    "rf.features_per_split",
    "rf.min_leaf",
    "mlp.hidden",
    "mlp.learning_rate",
    "mlp.momentum",
    "mlp.epochs",
];

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, Error> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Applies a flag value over the file value.
    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    /// Comma-separated list.
    pub fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, Error> {
        self.path(key)
            .ok_or_else(|| Error::Config(format!("--{key} is required")))
    }

    pub fn seed(&self) -> Result<u64, Error> {
        self.get("seed")?
            .ok_or_else(|| Error::Config("--seed is required".into()))
    }

    pub fn features(&self) -> Result<Option<Vec<MetricId>>, Error> {
        let names = self.list("features");
        if names.is_empty() {
            return Ok(None);
        }
        names.iter().map(|n| n.parse()).collect::<Result<Vec<_>, _>>().map(Some)
    }

    pub fn thresholds(&self) -> Result<Option<(f64, f64)>, Error> {
        let parts = self.list("thresholds");
        match parts.as_slice() {
            [] => Ok(None),
            [a, b] => {
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad threshold `{s}`")))
                };
                Ok(Some((parse(a)?, parse(b)?)))
            }
            _ => Err(Error::Config("thresholds must be `q1,q3`".into())),
        }
    }

    pub fn require_nbi(&self) -> Result<bool, Error> {
        Ok(self.get("require_nbi")?.unwrap_or(false))
    }

    fn spec(&self, kind: ClassifierKind) -> Result<ClassifierSpec, Error> {
        let mut spec = ClassifierSpec::default_for(kind);
        match &mut spec {
            ClassifierSpec::DecisionTree(p) => {
                if let Some(v) = self.get("dt.min_leaf")? {
                    p.min_leaf = v;
                }
                if let Some(v) = self.get("dt.max_depth")? {
                    p.max_depth = Some(v);
                }
            }
            ClassifierSpec::RandomForest(p) => {
                if let Some(v) = self.get("rf.trees")? {
                    p.trees = v;
                }
                if let Some(v) = self.get("rf.features_per_split")? {
                    p.features_per_split = Some(v);
                }
                if let Some(v) = self.get("rf.min_leaf")? {
                    p.min_leaf = v;
                }
            }
            ClassifierSpec::MultilayerPerceptron(p) => {
                if let Some(v) = self.get("mlp.hidden")? {
                    p.hidden = Some(v);
                }
                if let Some(v) = self.get("mlp.learning_rate")? {
                    p.learning_rate = v;
                }
                if let Some(v) = self.get("mlp.momentum")? {
                    p.momentum = v;
                }
                if let Some(v) = self.get("mlp.epochs")? {
                    p.epochs = v;
                }
            }
        }
        Ok(spec)
    }

    /// Classifiers named by `classifier`, or all three.
    pub fn classifiers(&self) -> Result<Vec<ClassifierSpec>, Error> {
        let names = self.list("classifier");
        let kinds: Vec<ClassifierKind> = if names.is_empty() {
            ClassifierKind::ALL.to_vec()
        } else {
            names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?
        };
        kinds.into_iter().map(|k| self.spec(k)).collect()
    }

    pub fn single_classifier(&self) -> Result<ClassifierSpec, Error> {
        match self.classifiers()?.as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(Error::Config(
                "--classifier must name exactly one of dt, rf, mlp".into(),
            )),
        }
    }

    pub fn population(&self) -> Result<Population, Error> {
        Ok(self.get("population")?.unwrap_or(Population::Raw))
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, Error> {
        let mut p = PipelineConfig::new(self.seed()?);
        p.thresholds = self.thresholds()?;
        p.classifiers = self.classifiers()?;
        if let Some(k) = self.get("k")? {
            p.k = k;
        }
        (p.algorithms, p.top) = self.ranking()?;
        p.population = self.population()?;
        if let Some(t) = self.get("threshold")? {
            p.correlation_threshold = t;
        }
        p.features = self.features()?;
        Ok(p)
    }

    /// Ranking algorithms (default all four) and table length (default 10).
    pub fn ranking(&self) -> Result<(Vec<RankingAlgorithm>, usize), Error> {
        let names = self.list("ranking");
        let algorithms = if names.is_empty() {
            RankingAlgorithm::ALL.to_vec()
        } else {
            names.iter().map(|a| a.parse()).collect::<Result<_, _>>()?
        };
        Ok((algorithms, self.get("top")?.unwrap_or(10)))
    }
}
