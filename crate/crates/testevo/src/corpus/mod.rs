//! Candidate discovery, clone cache and corpus filtering.
//!
//! Repositories enter the corpus through a discovery backend (live hosting
//! API or an offline fixture index), get cloned bare into a cache keyed by
//! host id, and must pass the Android filters: a manifest file anywhere in
//! the terminal tree and at least `min_releases` releases including master.

pub mod discovery;

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::GitRepo;

/// One candidate repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRef {
    /// Unique id within a corpus, e.g. `owner/name`.
    pub host_id: String,
    pub clone_url: String,
    /// Set once fetched; points at a local git repository.
    pub local_path: Option<PathBuf>,
}

impl RepoRef {
    pub fn new(host_id: impl Into<String>, clone_url: impl Into<String>) -> Self {
        Self { host_id: host_id.into(), clone_url: clone_url.into(), local_path: None }
    }
}

/// The corpus admission rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub require_manifest: bool,
    /// Minimum number of releases, master included. Must be >= 2 for any
    /// evolution analysis.
    pub min_releases: u64,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        Self { require_manifest: true, min_releases: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NoManifest,
    TooFewReleases,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NoManifest => write!(f, "no-manifest"),
            Self::TooFewReleases => write!(f, "too-few-releases"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Pass,
    Reject(RejectReason),
}

impl FilterDecision {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass)
    }
}

/// Cache directory for one repository: `<cache_dir>/<host_id with '/' -> '__'>`.
pub fn cache_path(cache_dir: &Path, host_id: &str) -> PathBuf {
    cache_dir.join(host_id.replace('/', "__"))
}

/// Clone a repository (bare, full history) into the cache, or reuse the
/// cached copy. A second call on a cached repository is a no-op refresh so
/// reruns stay reproducible.
pub fn fetch(repo: &RepoRef, cache_dir: &Path) -> Result<RepoRef> {
    let dest = cache_path(cache_dir, &repo.host_id);

    if dest.exists() && GitRepo::open(&dest).is_ok() {
        let mut fetched = repo.clone();
        fetched.local_path = Some(dest);
        return Ok(fetched);
    }

    std::fs::create_dir_all(cache_dir)
        .map_err(|_| Error::CacheDirUnwritable(cache_dir.to_path_buf()))?;

    // Bare and full: tag-to-tag diffs need complete history, a worktree is
    // never needed.
    let out = Command::new("git")
        .args(["clone", "--bare", "--"])
        .arg(&repo.clone_url)
        .arg(&dest)
        .env("GIT_TERMINAL_PROMPT", "0")
        .env("LC_ALL", "C")
        .output()?;
    if !out.status.success() {
        return Err(Error::CloneFailed {
            url: repo.clone_url.clone(),
            reason: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }

    GitRepo::open(&dest).map_err(|e| Error::CloneFailed {
        url: repo.clone_url.clone(),
        reason: e.to_string(),
    })?;
    let mut fetched = repo.clone();
    fetched.local_path = Some(dest);
    Ok(fetched)
}

/// Apply the corpus filters to a fetched repository.
///
/// The manifest check looks for a file named `AndroidManifest.xml` at any
/// depth of the terminal release tree; library-module layouts keep it below
/// the root.
pub fn passes_filter(repo: &RepoRef, filter: &CorpusFilter) -> Result<FilterDecision> {
    let path = repo.local_path.as_ref().ok_or_else(|| Error::RepoUnreadable {
        path: PathBuf::from(&repo.host_id),
        reason: "repository was not fetched".to_string(),
    })?;
    let git = GitRepo::open(path)?;

    let releases = match git.list_releases() {
        Ok(r) => r,
        Err(Error::NoReleases) => Vec::new(),
        Err(e) => return Err(e),
    };
    if (releases.len() as u64) < filter.min_releases {
        return Ok(FilterDecision::Reject(RejectReason::TooFewReleases));
    }

    if filter.require_manifest {
        let terminal = releases.last().expect("non-empty after release check");
        let tree = git.snapshot(terminal)?;
        let has_manifest = tree
            .paths()
            .any(|p| p.rsplit('/').next() == Some("AndroidManifest.xml"));
        if !has_manifest {
            return Ok(FilterDecision::Reject(RejectReason::NoManifest));
        }
    }

    Ok(FilterDecision::Pass)
}
