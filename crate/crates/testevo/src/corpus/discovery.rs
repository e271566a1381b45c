//! Repository discovery backends.
//!
//! The live hosting-API backend and the offline fixture-index backend share
//! one contract, so the whole pipeline runs without network access. Results
//! are deduplicated by host id and returned in host-id order.

use std::path::{Path, PathBuf};

use crate::corpus::RepoRef;
use crate::error::{Error, Result};

pub trait DiscoveryBackend {
    /// Raw backend search; may contain duplicates and arbitrary order.
    fn search(&self, query: &str, page_limit: usize) -> Result<Vec<RepoRef>>;
}

/// Validated discovery: non-empty query, deduplicated, host-id ordered.
pub fn discover(
    backend: &dyn DiscoveryBackend,
    query: &str,
    page_limit: usize,
) -> Result<Vec<RepoRef>> {
    if query.trim().is_empty() {
        return Err(Error::InvalidQuery);
    }
    let mut repos = backend.search(query, page_limit)?;
    repos.sort_by(|a, b| a.host_id.cmp(&b.host_id));
    repos.dedup_by(|a, b| a.host_id == b.host_id);
    Ok(repos)
}

// ---------------------------------------------------------------------------
// Offline fixture index
// ---------------------------------------------------------------------------

/// Directory of metadata files, one per repository, `key=value` lines with
/// keys `id`, `description` and `clone_url`. The query matches
/// case-insensitively against id and description.
pub struct FixtureIndexBackend {
    dir: PathBuf,
}

impl FixtureIndexBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

struct FixtureEntry {
    id: String,
    description: String,
    clone_url: String,
}

fn parse_fixture_file(path: &Path, content: &str) -> Result<FixtureEntry> {
    let mut id = None;
    let mut description = String::new();
    let mut clone_url = None;
    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::MalformedResponse(format!(
                "{}: expected key=value, got {line:?}",
                path.display()
            )));
        };
        match key.trim() {
            "id" => id = Some(value.trim().to_string()),
            "description" => description = value.trim().to_string(),
            "clone_url" => clone_url = Some(value.trim().to_string()),
            _ => {}
        }
    }
    match (id, clone_url) {
        (Some(id), Some(clone_url)) => Ok(FixtureEntry { id, description, clone_url }),
        _ => Err(Error::MalformedResponse(format!(
            "{}: missing id or clone_url",
            path.display()
        ))),
    }
}

impl DiscoveryBackend for FixtureIndexBackend {
    fn search(&self, query: &str, _page_limit: usize) -> Result<Vec<RepoRef>> {
        let needle = query.to_lowercase();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&self.dir)
            .map_err(|e| Error::ApiUnreachable(format!("{}: {e}", self.dir.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        entries.sort();

        let mut repos = Vec::new();
        for path in entries {
            let content = std::fs::read_to_string(&path)?;
            let entry = parse_fixture_file(&path, &content)?;
            let haystack = format!("{} {}", entry.id, entry.description).to_lowercase();
            if haystack.contains(&needle) {
                repos.push(RepoRef::new(entry.id, entry.clone_url));
            }
        }
        Ok(repos)
    }
}

// ---------------------------------------------------------------------------
// Live hosting API
// ---------------------------------------------------------------------------

/// GitHub-style repository search backend. Pagination is sequential to
/// respect rate limits; the auth token comes from the environment only.
pub struct HostingApiBackend {
    base_url: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
    page_size: usize,
}

impl HostingApiBackend {
    pub const TOKEN_ENV: &'static str = "GITHUB_TOKEN";

    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            token: std::env::var(Self::TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            client: reqwest::blocking::Client::builder()
                .user_agent(concat!("testevo/", env!("CARGO_PKG_VERSION")))
                .build()
                .expect("static client config"),
            page_size: 100,
        }
    }

    pub fn github() -> Self {
        Self::new("https://api.github.com")
    }
}

/// Extract repositories from one search-response page.
pub fn parse_search_page(page: &serde_json::Value) -> Result<Vec<RepoRef>> {
    let items = page
        .get("items")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::MalformedResponse("missing items array".to_string()))?;
    let mut repos = Vec::with_capacity(items.len());
    for item in items {
        let full_name = item
            .get("full_name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::MalformedResponse("item without full_name".to_string()))?;
        let clone_url = item
            .get("clone_url")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::MalformedResponse("item without clone_url".to_string()))?;
        repos.push(RepoRef::new(full_name, clone_url));
    }
    Ok(repos)
}

impl DiscoveryBackend for HostingApiBackend {
    fn search(&self, query: &str, page_limit: usize) -> Result<Vec<RepoRef>> {
        let mut repos = Vec::new();
        for page in 1..=page_limit.max(1) {
            let mut request = self
                .client
                .get(format!("{}/search/repositories", self.base_url))
                .query(&[
                    ("q", query),
                    ("per_page", &self.page_size.to_string()),
                    ("page", &page.to_string()),
                ])
                .header("Accept", "application/vnd.github+json");
            if let Some(token) = &self.token {
                request = request.bearer_auth(token);
            }
            let response = request
                .send()
                .map_err(|e| Error::ApiUnreachable(e.to_string()))?;

            let status = response.status();
            if status.as_u16() == 403 || status.as_u16() == 429 {
                return Err(Error::RateLimited);
            }
            if !status.is_success() {
                return Err(Error::ApiUnreachable(format!("status {status}")));
            }
            let body: serde_json::Value = response
                .json()
                .map_err(|e| Error::MalformedResponse(e.to_string()))?;
            let page_repos = parse_search_page(&body)?;
            let done = page_repos.len() < self.page_size;
            repos.extend(page_repos);
            if done {
                break;
            }
        }
        Ok(repos)
    }
}
