//! Shared fixture machinery for the integration suites: a deterministic git
//! repository builder, a declarative Java source renderer, and an
//! independent brute-force oracle that recomputes every metric from raw git
//! output plus the declared fixture structure.

#![allow(dead_code)]

pub mod javafix;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use javafix::JavaFileFixture;

/// One file of a release tree.
#[derive(Debug, Clone)]
pub enum FileFixture {
    Raw(String),
    Java(JavaFileFixture),
}

impl FileFixture {
    pub fn render(&self) -> String {
        match self {
            FileFixture::Raw(text) => text.clone(),
            FileFixture::Java(java) => java.render(),
        }
    }

    pub fn java(&self) -> Option<&JavaFileFixture> {
        match self {
            FileFixture::Java(j) => Some(j),
            FileFixture::Raw(_) => None,
        }
    }
}

/// One release: the complete tree state plus an optional tag. `tag: None`
/// makes this the untagged head commit (the synthetic master release).
#[derive(Debug, Clone)]
pub struct ReleaseFixture {
    pub tag: Option<&'static str>,
    /// Annotated tag instead of lightweight.
    pub annotated: bool,
    pub files: BTreeMap<String, FileFixture>,
}

impl ReleaseFixture {
    pub fn tagged(tag: &'static str, files: BTreeMap<String, FileFixture>) -> Self {
        Self { tag: Some(tag), annotated: false, files }
    }

    pub fn annotated(tag: &'static str, files: BTreeMap<String, FileFixture>) -> Self {
        Self { tag: Some(tag), annotated: true, files }
    }

    pub fn untagged(files: BTreeMap<String, FileFixture>) -> Self {
        Self { tag: None, annotated: false, files }
    }

    /// Release name as the analyzer will see it.
    pub fn release_name(&self) -> &'static str {
        self.tag.unwrap_or("master")
    }
}

#[derive(Debug, Clone)]
pub struct RepoFixture {
    pub name: &'static str,
    pub releases: Vec<ReleaseFixture>,
}

impl RepoFixture {
    /// Names of the releases the analyzer should report (tags in declared
    /// order, then `master` for a trailing untagged commit).
    pub fn release_names(&self) -> Vec<&'static str> {
        self.releases.iter().map(|r| r.release_name()).collect()
    }
}

pub fn run_git(dir: &Path, args: &[&str], date: Option<&str>) {
    let mut cmd = Command::new("git");
    cmd.arg("-C")
        .arg(dir)
        .args([
            "-c",
            "user.name=fixture",
            "-c",
            "user.email=fixture@example.com",
            "-c",
            "tag.gpgSign=false",
            "-c",
            "commit.gpgsign=false",
        ])
        .args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .env("LC_ALL", "C");
    if let Some(date) = date {
        cmd.env("GIT_AUTHOR_DATE", date).env("GIT_COMMITTER_DATE", date);
    }
    let out = cmd.output().expect("git runs");
    assert!(
        out.status.success(),
        "git {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Deterministic commit timestamps: one day apart, fixed epoch.
pub fn fixture_date(step: usize) -> String {
    format!("{} +0000", 1_460_000_000 + step as i64 * 86_400)
}

/// Materialize a fixture as a real git repository under `root/<name>`.
/// Commit and tag dates are deterministic, so every derived hash and
/// ordering is stable.
pub fn build_git_repo(root: &Path, fixture: &RepoFixture) -> PathBuf {
    let dir = root.join(fixture.name);
    std::fs::create_dir_all(&dir).expect("create repo dir");
    run_git(&dir, &["init", "-q", "-b", "master"], None);

    for (step, release) in fixture.releases.iter().enumerate() {
        // Reset worktree to exactly this release's tree.
        for entry in std::fs::read_dir(&dir).expect("read repo dir") {
            let entry = entry.expect("dir entry");
            if entry.file_name() == ".git" {
                continue;
            }
            let path = entry.path();
            if path.is_dir() {
                std::fs::remove_dir_all(&path).expect("clear dir");
            } else {
                std::fs::remove_file(&path).expect("clear file");
            }
        }
        for (path, file) in &release.files {
            let full = dir.join(path);
            if let Some(parent) = full.parent() {
                std::fs::create_dir_all(parent).expect("create parent");
            }
            std::fs::write(&full, file.render()).expect("write file");
        }
        let date = fixture_date(step);
        run_git(&dir, &["add", "-A"], None);
        run_git(
            &dir,
            &["commit", "-q", "--allow-empty", "-m", &format!("release {}", release.release_name())],
            Some(&date),
        );
        if let Some(tag) = release.tag {
            if release.annotated {
                run_git(&dir, &["tag", "-a", tag, "-m", tag], Some(&date));
            } else {
                run_git(&dir, &["tag", tag], Some(&date));
            }
        }
    }
    dir
}

/// Write a fixture-index metadata file for a repository.
pub fn write_index_entry(index_dir: &Path, id: &str, description: &str, clone_url: &Path) {
    std::fs::create_dir_all(index_dir).expect("create index dir");
    let file = index_dir.join(format!("{}.repo", id.replace('/', "__")));
    std::fs::write(
        file,
        format!("id={id}\ndescription={description}\nclone_url={}\n", clone_url.display()),
    )
    .expect("write index entry");
}

/// Build the five standard fixture repositories plus a fixture index that
/// lists them, rooted under `root`. Returns the index directory and the
/// oracle handles for the three analyzable repositories.
pub fn build_standard_corpus(root: &Path) -> (PathBuf, Vec<oracle::OracleRepo>) {
    let index_dir = root.join("index");
    let mut oracles = Vec::new();
    for fixture in repos::analyzable_repos() {
        let dir = build_git_repo(root, &fixture);
        write_index_entry(&index_dir, fixture.name, "An Android fixture app", &dir);
        oracles.push(oracle::OracleRepo { fixture, dir });
    }
    for fixture in [repos::repo_delta(), repos::repo_epsilon()] {
        let dir = build_git_repo(root, &fixture);
        write_index_entry(&index_dir, fixture.name, "Android assorted fixture", &dir);
    }
    (index_dir, oracles)
}

/// A run config over a fixture corpus with cache and output under `root`.
pub fn fixture_config(root: &Path, index_dir: &Path) -> testevo::config::RunConfig {
    let toml = format!(
        r#"
cache_dir = "{}"
output_dir = "{}"
jobs = 2

[corpus]
fixture_index = "{}"
"#,
        root.join("cache").display(),
        root.join("out").display(),
        index_dir.display(),
    );
    testevo::config::RunConfig::from_toml(&toml).expect("fixture config is valid")
}

/// `git diff --numstat --no-renames` between two refs: (added, deleted, path)
/// per changed file. Binary files ("- -") are skipped, like a script summing
/// numeric columns would.
pub fn git_numstat(dir: &Path, from: &str, to: &str) -> Vec<(u64, u64, String)> {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["diff", "--numstat", "--no-renames", from, to])
        .env("LC_ALL", "C")
        .output()
        .expect("git diff runs");
    assert!(out.status.success(), "numstat failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|line| {
            let mut parts = line.splitn(3, '\t');
            let added = parts.next()?.trim();
            let deleted = parts.next()?.trim();
            let path = parts.next()?.trim();
            if added == "-" || deleted == "-" {
                return None;
            }
            Some((added.parse().ok()?, deleted.parse().ok()?, path.to_string()))
        })
        .collect()
}
