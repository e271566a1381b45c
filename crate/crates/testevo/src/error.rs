//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("search query must not be empty")]
    InvalidQuery,

    #[error("hosting API unreachable: {0}")]
    ApiUnreachable(String),

    #[error("hosting API rate limit hit; back off and retry")]
    RateLimited,

    #[error("malformed hosting API response: {0}")]
    MalformedResponse(String),

    #[error("clone of {url} failed: {reason}")]
    CloneFailed { url: String, reason: String },

    #[error("cache directory {0} is not writable")]
    CacheDirUnwritable(PathBuf),

    #[error("repository at {path} is not readable: {reason}")]
    RepoUnreadable { path: PathBuf, reason: String },

    #[error("repository has no tags and no readable head")]
    NoReleases,

    #[error("unknown commit {0}")]
    UnknownCommit(String),

    #[error("unbalanced braces at line {line}")]
    UnbalancedBraces { line: usize },

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("empty release-pair series")]
    EmptySeries,

    #[error("empty corpus context")]
    EmptyContext,

    #[error("requested sample of {requested} but only {eligible} eligible records")]
    InsufficientRecords { requested: usize, eligible: usize },

    #[error("label references unknown record id {0}")]
    UnknownRecordId(String),

    #[error("invalid label category {0:?} (expected refactoring, non-gui or gui)")]
    InvalidCategory(String),

    #[error("invalid label level {0:?} (expected class or method)")]
    InvalidLevel(String),

    #[error("invalid label file: {0}")]
    InvalidLabelFile(String),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("output path {0} is not writable")]
    OutputUnwritable(PathBuf),

    #[error("missing input: {0}")]
    MissingInput(PathBuf),

    #[error("git {args:?} failed: {stderr}")]
    GitCommand { args: Vec<String>, stderr: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
