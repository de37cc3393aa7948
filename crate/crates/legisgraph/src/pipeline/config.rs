//! Pipeline configuration: one TOML or JSON file drives every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::graphs::MergeRule;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub collection_id: String,
    /// Builtin profile name (`us`, `de`) or a path to a profile file.
    pub profile: String,
    /// Snapshot manifests in year order, relative to the config file.
    pub manifests: Vec<String>,
    /// Output directory, relative to the config file.
    pub output_dir: String,
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub export: ExportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    /// Merge condition: `none`, `chapter-or-title`, `book-or-law`, or
    /// `level:<n>`.
    pub rho: String,
    pub alpha: f64,
    /// The headline configuration clusters on references only.
    pub include_sequence_arcs: bool,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig {
            rho: "chapter-or-title".to_string(),
            alpha: 0.5,
            include_sequence_arcs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    pub runs: u32,
    pub threshold: f64,
    /// Preferred number of clusters; omit for automatic resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_n: Option<u32>,
    pub seed_base: u64,
    pub tau: f64,
    pub lambda: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            runs: 1000,
            threshold: 0.95,
            preferred_n: Some(100),
            seed_base: 0,
            tau: 0.15,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub gamma: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig { gamma: 0.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    /// Clusters drawn per year before condensing into the miscellaneous
    /// block.
    pub top_n_clusters: usize,
    /// Families with distinct colors.
    pub top_families: usize,
    /// Minimum token share (of both endpoint clusters) for a drawn spline.
    pub flow_threshold: f64,
    /// Quotient-viz node filter.
    pub min_tokens: u64,
    /// Quotient-viz label filter: combined in+out reference count.
    pub degree_label_threshold: u64,
    pub fr_k: f64,
    pub fr_seed: u64,
    pub fr_iterations: usize,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            top_n_clusters: 50,
            top_families: 20,
            flow_threshold: 0.15,
            min_tokens: 0,
            degree_label_threshold: 20,
            fr_k: 2.2,
            fr_seed: 1234,
            fr_iterations: 100,
        }
    }
}

impl PipelineConfig {
    /// Loads and validates a config file (TOML or JSON by extension).
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let config: PipelineConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?,
            _ => toml::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks every numeric parameter against its documented range.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |ok: bool, msg: &str| -> Result<(), PipelineError> {
            if ok {
                Ok(())
            } else {
                Err(PipelineError::Config(msg.to_string()))
            }
        };
        cfg(!self.manifests.is_empty(), "manifests must not be empty")?;
        cfg(!self.collection_id.is_empty(), "collection_id must be set")?;
        self.merge_rule()?;
        cfg(
            self.sequence.alpha > 0.0 && self.sequence.alpha <= 1.0,
            "sequence.alpha must lie in (0, 1]",
        )?;
        cfg(self.clustering.runs >= 1, "clustering.runs must be ≥ 1")?;
        cfg(
            self.clustering.threshold > 0.0 && self.clustering.threshold <= 1.0,
            "clustering.threshold must lie in (0, 1]",
        )?;
        cfg(
            (0.0..1.0).contains(&self.clustering.tau),
            "clustering.tau must lie in [0, 1)",
        )?;
        cfg(
            self.clustering.lambda >= 0.0,
            "clustering.lambda must be ≥ 0",
        )?;
        cfg(
            (0.0..=1.0).contains(&self.dynamics.gamma),
            "dynamics.gamma must lie in [0, 1]",
        )?;
        cfg(
            (0.0..=1.0).contains(&self.export.flow_threshold),
            "export.flow_threshold must lie in [0, 1]",
        )?;
        cfg(self.export.top_n_clusters >= 1, "export.top_n_clusters must be ≥ 1")?;
        cfg(self.export.fr_k > 0.0, "export.fr_k must be positive")?;
        cfg(
            self.export.fr_iterations >= 1,
            "export.fr_iterations must be ≥ 1",
        )?;
        Ok(())
    }

    pub fn merge_rule(&self) -> Result<MergeRule, PipelineError> {
        parse_merge_rule(&self.sequence.rho)
    }

    /// Manifest paths resolved against the config file location.
    pub fn manifest_paths(&self, base_dir: &Path) -> Vec<PathBuf> {
        self.manifests.iter().map(|m| base_dir.join(m)).collect()
    }

    pub fn output_path(&self, base_dir: &Path) -> PathBuf {
        base_dir.join(&self.output_dir)
    }
}

pub fn parse_merge_rule(rho: &str) -> Result<MergeRule, PipelineError> {
    match rho {
        "none" => Ok(MergeRule::None),
        "chapter-or-title" => Ok(MergeRule::ChapterOrTitle),
        "book-or-law" => Ok(MergeRule::BookOrLaw),
        other => {
            if let Some(level) = other.strip_prefix("level:") {
                let level: u32 = level.parse().map_err(|_| {
                    PipelineError::Config(format!("invalid merge level in rho {other:?}"))
                })?;
                Ok(MergeRule::AncestorLevel(level))
            } else {
                Err(PipelineError::Config(format!(
                    "unknown rho {other:?}: expected none, chapter-or-title, book-or-law, or level:<n>"
                )))
            }
        }
    }
}
