//! Experiment manifest: everything needed to rerun an experiment, in TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chat::{LiveConfig, RetryPolicy, SamplingParams, SyntheticProfile};
use crate::engine::fake::DEFAULT_DEPTH;
use crate::engine::EngineConfig;
use crate::extract::shots_fixture_text;
use crate::metrics::AggregateOptions;
use crate::orchestrator::{GameSettings, ProbeSettings};
use crate::prompts::{fixture_hash, rules_summary, variation, PromptError, VariationConfig, VariationId};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Parse(String),
    #[error("manifest version {found}, this build reads {MANIFEST_VERSION}")]
    Version { found: u32 },
    #[error("fixture {name} has hash {found}, the shipped asset hashes to {expected}")]
    Fixture { name: &'static str, found: String, expected: String },
    #[error(transparent)]
    Variation(#[from] PromptError),
    #[error("manifest: {0}")]
    Invalid(String),
}

/// Hashes of the fixtures the variation's prompts can pull in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixtures {
    pub rules_summary: String,
    pub extraction_shots: String,
}

impl Fixtures {
    pub fn shipped() -> Self {
        Fixtures { rules_summary: fixture_hash(rules_summary()), extraction_shots: fixture_hash(shots_fixture_text()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EngineSpec {
    /// The built-in search, run in-process.
    Builtin { depth: u32 },
    /// An external UCI engine.
    Uci(EngineConfig),
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec::Builtin { depth: DEFAULT_DEPTH }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MockSpec {
    /// Simulated players following per-game plans.
    Synthetic { profile: SyntheticProfile },
    /// The reference population of simulated players.
    Reference,
    /// A JSON Lines reply script, relative to the manifest.
    Script { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdapterSpec {
    Mock(MockSpec),
    Live {
        #[serde(default)]
        endpoint: LiveConfig,
        #[serde(default)]
        sampling: SamplingParams,
        #[serde(default)]
        retry: RetryPolicy,
    },
}

impl Default for AdapterSpec {
    fn default() -> Self {
        AdapterSpec::Mock(MockSpec::Reference)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub manifest_version: u32,
    pub seed: u64,
    pub games: usize,
    #[serde(default = "one")]
    pub parallelism: usize,
    /// Unix seconds; set when a run starts and finishes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_unix: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_unix: Option<u64>,
    pub variation: VariationConfig,
    pub fixtures: Fixtures,
    #[serde(default)]
    pub settings: GameSettings,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub adapter: AdapterSpec,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default)]
    pub report: AggregateOptions,
}

fn one() -> usize {
    1
}

impl ExperimentManifest {
    /// A mock-mode manifest for a shipped variation.
    pub fn new(id: VariationId, games: usize, seed: u64) -> Self {
        ExperimentManifest {
            manifest_version: MANIFEST_VERSION,
            seed,
            games,
            parallelism: 1,
            started_unix: None,
            finished_unix: None,
            variation: variation(id),
            fixtures: Fixtures::shipped(),
            settings: GameSettings::default(),
            engine: EngineSpec::default(),
            adapter: AdapterSpec::default(),
            probe: ProbeSettings::default(),
            report: AggregateOptions::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ManifestError> {
        let m: ExperimentManifest = toml::from_str(text).map_err(|e| ManifestError::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.manifest_version != MANIFEST_VERSION {
            return Err(ManifestError::Version { found: self.manifest_version });
        }
        if self.games == 0 {
            return Err(ManifestError::Invalid("games must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(ManifestError::Invalid("parallelism must be at least 1".into()));
        }
        if self.settings.max_attempts == 0 {
            return Err(ManifestError::Invalid("max_attempts must be at least 1".into()));
        }
        let shipped = Fixtures::shipped();
        let check = |name, found: &String, expected: &String| {
            if found == expected {
                Ok(())
            } else {
                Err(ManifestError::Fixture { name, found: found.clone(), expected: expected.clone() })
            }
        };
        check("rules_summary", &self.fixtures.rules_summary, &shipped.rules_summary)?;
        check("extraction_shots", &self.fixtures.extraction_shots, &shipped.extraction_shots)?;
        self.variation.validate()?;
        if let EngineSpec::Uci(cfg) = &self.engine {
            cfg.validate().map_err(|e| ManifestError::Invalid(e.to_string()))?;
        }
        Ok(())
    }
}
