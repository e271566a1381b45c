//! Run configuration (TOML) and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{CorpusFilter, RepoRef};
use crate::detect::{builtin_registry, ToolSpec};
use crate::error::{Error, Result};
use crate::history::ProjectScope;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusSection,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker pool size; defaults to 4.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub filters: FiltersSection,
    #[serde(default)]
    pub scope: ScopeSection,
    /// Tool registry override; the builtin seven tools when absent.
    #[serde(default)]
    pub tools: Option<Vec<ToolSpec>>,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub flags: FlagsSection,
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Exactly one of `fixture_index`, `query` or `repos` selects the corpus
/// source.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Directory of offline metadata files.
    #[serde(default)]
    pub fixture_index: Option<PathBuf>,
    /// Live hosting-API search query (also used to filter the fixture
    /// index; defaults to "Android" there).
    #[serde(default)]
    pub query: Option<String>,
    #[serde(default)]
    pub page_limit: Option<usize>,
    #[serde(default)]
    pub api_base_url: Option<String>,
    /// Explicit clone URLs or local paths.
    #[serde(default)]
    pub repos: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltersSection {
    #[serde(default = "default_min_releases")]
    pub min_releases: u64,
    #[serde(default = "default_true")]
    pub require_manifest: bool,
}

fn default_min_releases() -> u64 {
    2
}

fn default_true() -> bool {
    true
}

impl Default for FiltersSection {
    fn default() -> Self {
        Self { min_releases: default_min_releases(), require_manifest: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScopeSection {
    /// Extensions whose files count as project LOCs.
    #[serde(default = "default_extensions")]
    pub extensions: Vec<String>,
}

fn default_extensions() -> Vec<String> {
    vec!["java".to_string()]
}

impl Default for ScopeSection {
    fn default() -> Self {
        Self { extensions: default_extensions() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_sample_k")]
    pub k: usize,
    #[serde(default = "default_sample_seed")]
    pub seed: u64,
}

fn default_sample_k() -> usize {
    30
}

fn default_sample_seed() -> u64 {
    42
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self { k: default_sample_k(), seed: default_sample_seed() }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsSection {
    /// Count only @Test-annotated methods as test methods.
    #[serde(default)]
    pub annotated_only: bool,
    /// Exclude entirely-new test files from Tdiff.
    #[serde(default)]
    pub exclude_new_files: bool,
    #[serde(default)]
    pub case_sensitive_keywords: bool,
}

/// Resolved corpus source.
#[derive(Debug, Clone)]
pub enum CorpusSource {
    FixtureIndex { dir: PathBuf, query: String },
    HostingQuery { query: String, page_limit: usize, base_url: String },
    Repos(Vec<RepoRef>),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::MissingInput(path.to_path_buf()))?;
        Self::from_toml(text.as_str())
    }

    pub fn validate(&self) -> Result<()> {
        if self.filters.min_releases < 2 {
            return Err(Error::ConfigInvalid(
                "filters.min_releases must be at least 2 (master included)".to_string(),
            ));
        }
        let sources = [
            self.corpus.fixture_index.is_some(),
            self.corpus.query.is_some() && self.corpus.fixture_index.is_none(),
            self.corpus.repos.is_some(),
        ];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(Error::ConfigInvalid(
                "corpus must set exactly one of fixture_index, query or repos".to_string(),
            ));
        }
        if self.scope.extensions.is_empty() {
            return Err(Error::ConfigInvalid("scope.extensions must not be empty".to_string()));
        }
        let registry = self.registry();
        let mut names: Vec<&str> = registry.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != registry.len() {
            return Err(Error::ConfigInvalid("tool names must be unique".to_string()));
        }
        if registry.iter().any(|t| t.keywords.is_empty() || t.name.is_empty()) {
            return Err(Error::ConfigInvalid(
                "every tool needs a name and at least one keyword".to_string(),
            ));
        }
        if let Some(repos) = &self.corpus.repos {
            let mut ids: Vec<String> = repos.iter().map(|r| host_id_for(r)).collect();
            ids.sort();
            let before = ids.len();
            ids.dedup();
            if ids.len() != before {
                return Err(Error::ConfigInvalid(
                    "explicit repo list produces duplicate host ids".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn corpus_source(&self) -> Result<CorpusSource> {
        if let Some(dir) = &self.corpus.fixture_index {
            return Ok(CorpusSource::FixtureIndex {
                dir: dir.clone(),
                query: self.corpus.query.clone().unwrap_or_else(|| "Android".to_string()),
            });
        }
        if let Some(repos) = &self.corpus.repos {
            return Ok(CorpusSource::Repos(
                repos.iter().map(|entry| RepoRef::new(host_id_for(entry), entry.clone())).collect(),
            ));
        }
        if let Some(query) = &self.corpus.query {
            return Ok(CorpusSource::HostingQuery {
                query: query.clone(),
                page_limit: self.corpus.page_limit.unwrap_or(10),
                base_url: self
                    .corpus
                    .api_base_url
                    .clone()
                    .unwrap_or_else(|| "https://api.github.com".to_string()),
            });
        }
        Err(Error::ConfigInvalid("no corpus source configured".to_string()))
    }

    pub fn registry(&self) -> Vec<ToolSpec> {
        self.tools.clone().unwrap_or_else(builtin_registry)
    }

    pub fn filter(&self) -> CorpusFilter {
        CorpusFilter {
            require_manifest: self.filters.require_manifest,
            min_releases: self.filters.min_releases,
        }
    }

    pub fn project_scope(&self) -> ProjectScope {
        ProjectScope::new(self.scope.extensions.iter().cloned())
    }

    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or(4).max(1)
    }

    /// Stable hash of the full configuration, recorded in the run manifest.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(&hasher.finalize()[..8])
    }
}

/// Host id for an explicit repo entry: `owner/name` for URLs, the last path
/// component for local paths.
fn host_id_for(entry: &str) -> String {
    let trimmed = entry.trim_end_matches('/').trim_end_matches(".git");
    if let Some((_, rest)) = trimmed.split_once("://") {
        let segments: Vec<&str> = rest.split('/').filter(|s| !s.is_empty()).collect();
        if segments.len() >= 2 {
            return segments[1..].join("/");
        }
        return segments.join("/");
    }
    if let Some((head, rest)) = trimmed.split_once(':') {
        if head.contains('@') {
            return rest.trim_start_matches('/').to_string();
        }
    }
    trimmed.rsplit('/').next().unwrap_or(trimmed).to_string()
}
