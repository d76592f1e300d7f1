//! JSON run configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use paygan::data::{CorpusSpec, SplitFractions};
use paygan::gan::TrainConfig;
use paygan::Error;
use serde::{Deserialize, Serialize};

/// Stratified split settings. `seed` defaults to the corpus seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: Option<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let f = SplitFractions::default();
        SplitConfig {
            train: f.train,
            val: f.val,
            test: f.test,
            seed: None,
        }
    }
}

impl SplitConfig {
    pub fn fractions(&self) -> SplitFractions {
        SplitFractions {
            train: self.train,
            val: self.val,
            test: self.test,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory used when a command is run without `--out`.
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("paygan-out"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusSpec,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses a JSON document; errors name the offending field path.
    pub fn from_json(text: &str) -> paygan::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when no file is given.
    pub fn load(path: Option<&Path>) -> paygan::Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                RunConfig::from_json(&text)
            }
        }
    }

    /// Fills in derived defaults so the echoed config is complete.
    pub fn resolve(mut self) -> Self {
        self.split.seed = Some(self.split_seed());
        self
    }

    pub fn split_seed(&self) -> u64 {
        self.split.seed.unwrap_or(self.corpus.seed)
    }

    /// Checks every section; all failures are reported as config errors.
    pub fn validate(&self) -> paygan::Result<()> {
        self.corpus.validate().map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(format!("corpus: {other}")),
        })?;
        self.train.validate()?;
        self.split.fractions().validate().map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("split: {m}")),
            other => other,
        })?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
