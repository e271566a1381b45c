//! Test-file detection per tool and per-release size statistics.
//!
//! A `.java` file belongs to a tool when its decoded content contains one of
//! the tool's keywords, the same heuristic the study tools use. Detection is
//! independent per tool, so sets overlap (a Robotium test importing JUnit is
//! in both sets).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::history::{project_locs, FileTree, ProjectScope};
use crate::textdiff::{count_lines, looks_binary};

/// A named test framework and the substrings that mark a file as using it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub keywords: Vec<String>,
}

impl ToolSpec {
    pub fn new(name: &str, keywords: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            keywords: keywords.iter().map(|k| k.to_string()).collect(),
        }
    }
}

/// The six GUI-testing frameworks plus the JUnit baseline, keyed on their
/// package fragments.
pub fn builtin_registry() -> Vec<ToolSpec> {
    vec![
        ToolSpec::new("Espresso", &["espresso"]),
        ToolSpec::new("UIAutomator", &["uiautomator"]),
        ToolSpec::new("Selendroid", &["selendroid"]),
        ToolSpec::new("Robotium", &["robotium"]),
        ToolSpec::new("Robolectric", &["robolectric"]),
        ToolSpec::new("Appium", &["appium"]),
        ToolSpec::new("JUnit", &["org.junit", "junit.framework"]),
    ]
}

/// Size statistics of one tool's test files at one release.
#[derive(Debug, Clone)]
pub struct ReleaseTestStats {
    pub release: String,
    pub tool: String,
    pub test_files: BTreeSet<String>,
    pub ntc: u64,
    pub ttl: u64,
    pub plocs: u64,
    /// `ttl / plocs`; absent when the release has no project LOCs.
    pub tlr: Option<f64>,
}

fn decoded(content: &[u8]) -> Option<String> {
    if looks_binary(content) {
        return None;
    }
    Some(String::from_utf8_lossy(content).into_owned())
}

fn contains_keyword(content: &str, keywords: &[String], case_sensitive: bool) -> bool {
    if case_sensitive {
        keywords.iter().any(|k| content.contains(k.as_str()))
    } else {
        let lowered = content.to_lowercase();
        keywords.iter().any(|k| lowered.contains(&k.to_lowercase()))
    }
}

/// Every `.java` path whose content contains at least one tool keyword.
/// Binary-looking files are skipped.
pub fn detect_test_files(
    tree: &FileTree,
    tool: &ToolSpec,
    case_sensitive: bool,
) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    for (path, content) in tree.iter() {
        if !path.to_ascii_lowercase().ends_with(".java") {
            continue;
        }
        let Some(text) = decoded(content) else {
            log::debug!("skipping undecodable file {path}");
            continue;
        };
        if contains_keyword(&text, &tool.keywords, case_sensitive) {
            found.insert(path.to_string());
        }
    }
    found
}

/// NTC/TTL/Plocs/TLR of one tool at one release.
pub fn release_stats(
    tree: &FileTree,
    release: &str,
    tool: &ToolSpec,
    scope: &ProjectScope,
    case_sensitive: bool,
) -> ReleaseTestStats {
    let test_files = detect_test_files(tree, tool, case_sensitive);
    let ttl: u64 = test_files
        .iter()
        .filter_map(|p| tree.get(p))
        .map(count_lines)
        .sum();
    let plocs = project_locs(tree, scope);
    let tlr = if plocs > 0 { Some(ttl as f64 / plocs as f64) } else { None };
    ReleaseTestStats {
        release: release.to_string(),
        tool: tool.name.clone(),
        ntc: test_files.len() as u64,
        test_files,
        ttl,
        plocs,
        tlr,
    }
}
