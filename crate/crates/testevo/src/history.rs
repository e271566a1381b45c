//! Release enumeration, snapshot materialization and release-pair diffing.
//!
//! Reads the git object store through the git CLI (`for-each-ref`,
//! `ls-tree`, `cat-file --batch`); no working-tree checkout is ever needed.
//! Changed-LOC totals are computed in-process by a minimal line diff and are
//! bit-equivalent to `git diff --numstat --no-renames` sums, which the tests
//! use as an independent oracle.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::error::{Error, Result};
use crate::textdiff::{count_lines, line_churn};

/// One release: a tag, or the synthetic terminal `master` entry for the
/// default-branch head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseRef {
    pub name: String,
    pub commit_id: String,
    pub order_index: usize,
    /// Committer timestamp (UTC seconds) of the target commit.
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileStatus {
    Added,
    Deleted,
    Modified,
}

/// Churn of a single file across one release pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDiff {
    pub path: String,
    pub lines_added: u64,
    pub lines_deleted: u64,
    pub status: FileStatus,
}

impl FileDiff {
    pub fn churn(&self) -> u64 {
        self.lines_added + self.lines_deleted
    }
}

/// All file churn between two consecutive releases, restricted to the
/// project scope. A rename appears as one deletion plus one addition.
#[derive(Debug, Clone)]
pub struct PairDiff {
    pub from: ReleaseRef,
    pub to: ReleaseRef,
    pub file_diffs: Vec<FileDiff>,
    /// Total changed LOCs over all in-scope files.
    pub pdiff: u64,
}

impl PairDiff {
    /// Churn summed over an arbitrary subset of paths.
    pub fn churn_for<P: Fn(&str) -> bool>(&self, pred: P) -> u64 {
        self.file_diffs
            .iter()
            .filter(|d| pred(&d.path))
            .map(FileDiff::churn)
            .sum()
    }
}

/// Read-only file tree of one release: path -> blob bytes.
#[derive(Debug, Clone, Default)]
pub struct FileTree {
    files: BTreeMap<String, Vec<u8>>,
}

impl FileTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, content: impl Into<Vec<u8>>) {
        self.files.insert(path.into(), content.into());
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u8])> {
        self.files.iter().map(|(p, c)| (p.as_str(), c.as_slice()))
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }
}

/// Path predicate selecting the files whose LOCs count as "project LOCs".
#[derive(Debug, Clone)]
pub struct ProjectScope {
    extensions: Vec<String>,
}

impl Default for ProjectScope {
    fn default() -> Self {
        Self { extensions: vec!["java".to_string()] }
    }
}

impl ProjectScope {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(extensions: I) -> Self {
        Self {
            extensions: extensions
                .into_iter()
                .map(|e| e.into().trim_start_matches('.').to_ascii_lowercase())
                .collect(),
        }
    }

    pub fn matches(&self, path: &str) -> bool {
        let ext = match path.rsplit_once('.') {
            Some((_, ext)) => ext.to_ascii_lowercase(),
            None => return false,
        };
        self.extensions.iter().any(|e| *e == ext)
    }
}

/// Handle on a fetched repository directory (bare or with worktree).
#[derive(Debug, Clone)]
pub struct GitRepo {
    dir: PathBuf,
}

impl GitRepo {
    pub fn open(dir: &Path) -> Result<Self> {
        let repo = Self { dir: dir.to_path_buf() };
        repo.git(&["rev-parse", "--git-dir"]).map_err(|e| Error::RepoUnreadable {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(repo)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn git_command(&self, args: &[&str]) -> Command {
        let mut cmd = Command::new("git");
        cmd.arg("-C")
            .arg(&self.dir)
            .args(args)
            .env("GIT_TERMINAL_PROMPT", "0")
            .env("LC_ALL", "C");
        cmd
    }

    fn git(&self, args: &[&str]) -> Result<Vec<u8>> {
        let out = self.git_command(args).output()?;
        if !out.status.success() {
            return Err(Error::GitCommand {
                args: args.iter().map(|s| s.to_string()).collect(),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(out.stdout)
    }

    /// All tags ordered by committer timestamp of the target commit (ties by
    /// tag name), followed by a synthetic `master` entry for the head unless
    /// the head commit is the last tag's commit.
    pub fn list_releases(&self) -> Result<Vec<ReleaseRef>> {
        let format = "%(refname:short)%00%(objectname)%00%(objecttype)%00%(*objectname)%00%(*objecttype)%00%(committerdate:unix)%00%(*committerdate:unix)";
        let out = self.git(&["for-each-ref", "refs/tags", &format!("--format={format}")])?;
        let text = String::from_utf8_lossy(&out);

        let mut tags: Vec<(String, String, i64)> = Vec::new();
        for line in text.lines() {
            let fields: Vec<&str> = line.split('\0').collect();
            if fields.len() != 7 {
                continue;
            }
            let (name, oid, otype, peeled_oid, peeled_type, date, peeled_date) = (
                fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], fields[6],
            );
            let (commit, ts) = if peeled_oid.is_empty() {
                if otype != "commit" {
                    continue; // tag pointing at a blob or tree
                }
                (oid, date)
            } else {
                if peeled_type != "commit" {
                    continue;
                }
                (peeled_oid, peeled_date)
            };
            let Ok(ts) = ts.parse::<i64>() else {
                log::warn!("skipping tag {name}: unparseable date {ts:?}");
                continue;
            };
            tags.push((name.to_string(), commit.to_string(), ts));
        }
        tags.sort_by(|a, b| a.2.cmp(&b.2).then_with(|| a.0.cmp(&b.0)));

        let head = self
            .git(&["rev-parse", "HEAD"])
            .ok()
            .map(|o| String::from_utf8_lossy(&o).trim().to_string())
            .filter(|s| !s.is_empty());

        let mut releases: Vec<ReleaseRef> = tags
            .into_iter()
            .map(|(name, commit_id, timestamp)| ReleaseRef {
                name,
                commit_id,
                order_index: 0,
                timestamp,
            })
            .collect();

        if let Some(head_commit) = head {
            let dedup = releases.last().is_some_and(|last| last.commit_id == head_commit);
            if !dedup {
                let ts_out = self.git(&["log", "-1", "--format=%ct", &head_commit])?;
                let timestamp = String::from_utf8_lossy(&ts_out)
                    .trim()
                    .parse::<i64>()
                    .unwrap_or(i64::MAX);
                releases.push(ReleaseRef {
                    name: "master".to_string(),
                    commit_id: head_commit,
                    order_index: 0,
                    timestamp,
                });
            }
        }

        if releases.is_empty() {
            return Err(Error::NoReleases);
        }
        for (idx, rel) in releases.iter_mut().enumerate() {
            rel.order_index = idx;
        }
        Ok(releases)
    }

    /// Materialize the committed tree of a release straight from the object
    /// store. Submodule entries are skipped; symlink blobs carry their target
    /// path as content.
    pub fn snapshot(&self, release: &ReleaseRef) -> Result<FileTree> {
        self.snapshot_commit(&release.commit_id)
    }

    pub fn snapshot_commit(&self, commit: &str) -> Result<FileTree> {
        let out = self
            .git(&["ls-tree", "-r", "-z", commit])
            .map_err(|_| Error::UnknownCommit(commit.to_string()))?;

        let mut entries: Vec<(String, String)> = Vec::new(); // (oid, path)
        for entry in out.split(|&b| b == 0) {
            if entry.is_empty() {
                continue;
            }
            let entry = String::from_utf8_lossy(entry);
            let Some((header, path)) = entry.split_once('\t') else { continue };
            let mut parts = header.split(' ');
            let _mode = parts.next();
            let otype = parts.next().unwrap_or("");
            let oid = parts.next().unwrap_or("");
            if otype != "blob" || oid.is_empty() {
                continue;
            }
            entries.push((oid.to_string(), path.to_string()));
        }

        let mut tree = FileTree::new();
        if entries.is_empty() {
            return Ok(tree);
        }

        let mut child = self
            .git_command(&["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = BufReader::new(child.stdout.take().expect("piped stdout"));

        // git flushes per request in --batch mode, so a strict
        // request/response loop cannot deadlock.
        for (oid, path) in &entries {
            writeln!(stdin, "{oid}")?;
            stdin.flush()?;
            let mut header = String::new();
            stdout.read_line(&mut header)?;
            let fields: Vec<&str> = header.split_whitespace().collect();
            if fields.len() < 3 || fields[1] == "missing" {
                return Err(Error::UnknownCommit(oid.clone()));
            }
            let size: usize = fields[2]
                .parse()
                .map_err(|_| Error::UnknownCommit(oid.clone()))?;
            let mut content = vec![0u8; size];
            stdout.read_exact(&mut content)?;
            let mut lf = [0u8; 1];
            stdout.read_exact(&mut lf)?;
            tree.insert(path.clone(), content);
        }
        drop(stdin);
        child.wait()?;
        Ok(tree)
    }

    /// Diff two releases with rename detection disabled.
    pub fn diff_pair(
        &self,
        from: &ReleaseRef,
        to: &ReleaseRef,
        scope: &ProjectScope,
    ) -> Result<PairDiff> {
        let from_tree = self.snapshot(from)?;
        let to_tree = self.snapshot(to)?;
        Ok(diff_trees(&from_tree, &to_tree, from, to, scope))
    }
}

/// Pure tree-level diff; the git layer above only supplies the trees.
pub fn diff_trees(
    from_tree: &FileTree,
    to_tree: &FileTree,
    from: &ReleaseRef,
    to: &ReleaseRef,
    scope: &ProjectScope,
) -> PairDiff {
    let mut file_diffs = Vec::new();
    let mut pdiff = 0u64;

    let mut paths: Vec<&str> = from_tree.paths().chain(to_tree.paths()).collect();
    paths.sort_unstable();
    paths.dedup();

    for path in paths {
        if !scope.matches(path) {
            continue;
        }
        let (churn, status) = match (from_tree.get(path), to_tree.get(path)) {
            (Some(old), None) => (line_churn(old, b""), FileStatus::Deleted),
            (None, Some(new)) => (line_churn(b"", new), FileStatus::Added),
            (Some(old), Some(new)) => {
                if old == new {
                    continue;
                }
                (line_churn(old, new), FileStatus::Modified)
            }
            (None, None) => continue,
        };
        if churn.total() == 0 {
            continue; // binary or empty-content change; numstat shows no lines
        }
        pdiff += churn.total();
        file_diffs.push(FileDiff {
            path: path.to_string(),
            lines_added: churn.added,
            lines_deleted: churn.deleted,
            status,
        });
    }

    PairDiff { from: from.clone(), to: to.clone(), file_diffs, pdiff }
}

/// Number of physical lines of every in-scope file in a tree.
pub fn project_locs(tree: &FileTree, scope: &ProjectScope) -> u64 {
    tree.iter()
        .filter(|(p, _)| scope.matches(p))
        .map(|(_, c)| count_lines(c))
        .sum()
}
