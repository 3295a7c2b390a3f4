//! Run configuration: one JSON document, resolved against command-line
//! overrides (flags win).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use liit_core::{LabelColumn, LiitConfig, PerturbSpec, Strategy};
use serde::{Deserialize, Serialize};

/// One dataset entry in the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub label_column: LabelColumn,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Optional display name; the file stem otherwise.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_true() -> bool {
    true
}

/// The resolved run configuration. The master seed is mandatory: nothing in
/// the pipeline is allowed to seed itself from the clock.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Strategies for `bench`; all five when omitted.
    #[serde(default = "all_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_reruns")]
    pub reruns: usize,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub liit: LiitConfig<f64>,
    #[serde(default)]
    pub perturb: PerturbSpec,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn all_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

fn default_reruns() -> usize {
    5
}

fn default_parallelism() -> usize {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }

    /// Check everything that can be checked before any work starts.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.datasets.is_empty() {
            bail!("config lists no datasets");
        }
        for spec in &self.datasets {
            if !spec.path.exists() {
                bail!("dataset file {} does not exist", spec.path.display());
            }
        }
        if self.reruns < 1 {
            bail!("reruns must be >= 1");
        }
        if self.parallelism < 1 {
            bail!("parallelism must be >= 1");
        }
        self.liit.validate()?;
        self.perturb.validate()?;
        Ok(())
    }

    /// Single-line JSON of the resolved config, embedded in every artifact.
    pub fn provenance_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

impl DatasetSpec {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.path.display().to_string())
        })
    }
}
