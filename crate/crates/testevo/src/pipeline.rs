//! End-to-end pipeline: discover, fetch, filter, analyze, aggregate, write.
//!
//! Repositories are processed by a bounded worker pool; a failure (or panic)
//! in one repository is recorded in the run manifest and never aborts the
//! run. Aggregation and all file writes happen single-threaded afterwards,
//! and every output is sorted, so reruns over an unchanged cache are
//! byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::AssertUnwindSafe;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::classify::{classify_class, unanalyzable_record, ClassChangeRecord};
use crate::config::{CorpusSource, RunConfig};
use crate::corpus::discovery::{discover, FixtureIndexBackend, HostingApiBackend};
use crate::corpus::{fetch, passes_filter, FilterDecision, RepoRef};
use crate::detect::{release_stats, ReleaseTestStats, ToolSpec};
use crate::error::{Error, Result};
use crate::history::{diff_trees, FileTree, GitRepo, ProjectScope, ReleaseRef};
use crate::java::{extract, ClassSnapshot};
use crate::ledger::{build_record, LedgerRecord};
use crate::metrics::{
    overall_row, pair_metrics, project_report, tool_summary, ClassHistory, OverallRow,
    PairInputs, ProjectInputs, ProjectReport, ReleasePairMetrics, ToolSummary,
};
use crate::report;

pub const SCHEMA_VERSION: u32 = 1;

/// Behavior switches shared by the whole analysis.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalysisFlags {
    pub annotated_only: bool,
    pub exclude_new_files: bool,
    pub case_sensitive_keywords: bool,
}

/// Everything computed for one tool over one repository.
#[derive(Debug, Clone)]
pub struct ToolAnalysis {
    pub tool: String,
    pub stats: Vec<ReleaseTestStats>,
    pub pairs: Vec<ReleasePairMetrics>,
    pub ledger: Vec<LedgerRecord>,
    pub report: ProjectReport,
}

/// Full analysis of one repository (tools with no test files on the terminal
/// release are absent).
#[derive(Debug, Clone)]
pub struct RepoAnalysis {
    pub repo: String,
    pub releases: Vec<ReleaseRef>,
    pub tools: Vec<ToolAnalysis>,
    /// Files whose method extraction failed, per release.
    pub extraction_failures: u64,
}

struct ToolState {
    stats: Vec<ReleaseTestStats>,
    pairs: Vec<ReleasePairMetrics>,
    ledger: Vec<LedgerRecord>,
    history: ClassHistory,
}

/// Incremental release walker: feed releases oldest-first with their trees,
/// then `finish`. Per-release stats are kept for every registry tool; only
/// tools with test files on the terminal release (set membership, mirroring
/// a search over current repository state) make it into the result.
pub struct ReleaseWalk<'a> {
    repo_id: String,
    registry: &'a [ToolSpec],
    scope: &'a ProjectScope,
    flags: AnalysisFlags,
    states: Vec<ToolState>,
    releases: Vec<ReleaseRef>,
    prev_tree: Option<FileTree>,
    prev_snaps: BTreeMap<String, Option<ClassSnapshot>>,
    extraction_failures: u64,
}

impl<'a> ReleaseWalk<'a> {
    pub fn new(
        repo_id: &str,
        registry: &'a [ToolSpec],
        scope: &'a ProjectScope,
        flags: AnalysisFlags,
    ) -> Self {
        Self {
            repo_id: repo_id.to_string(),
            registry,
            scope,
            flags,
            states: registry
                .iter()
                .map(|_| ToolState {
                    stats: Vec::new(),
                    pairs: Vec::new(),
                    ledger: Vec::new(),
                    history: ClassHistory::default(),
                })
                .collect(),
            releases: Vec::new(),
            prev_tree: None,
            prev_snaps: BTreeMap::new(),
            extraction_failures: 0,
        }
    }

    pub fn push(&mut self, release: ReleaseRef, tree: FileTree) -> Result<()> {
        // Per-tool size stats and the union of detected files of this release.
        let mut detected_union: BTreeSet<String> = BTreeSet::new();
        for (tool, state) in self.registry.iter().zip(&mut self.states) {
            let stats = release_stats(
                &tree,
                &release.name,
                tool,
                self.scope,
                self.flags.case_sensitive_keywords,
            );
            detected_union.extend(stats.test_files.iter().cloned());
            state.history.observe_release(&stats.test_files);
            state.stats.push(stats);
        }

        // Extract methods once per detected file, shared across tools.
        let mut snaps: BTreeMap<String, Option<ClassSnapshot>> = BTreeMap::new();
        for path in &detected_union {
            let content = tree.get(path).expect("detected file exists in tree");
            let source = String::from_utf8_lossy(content);
            let snap = match extract(&source) {
                Ok(s) => Some(s.with_location(path, &release.name)),
                Err(e) => {
                    log::warn!(
                        "{}: cannot extract {path} at {}: {e}",
                        self.repo_id,
                        release.name
                    );
                    self.extraction_failures += 1;
                    None
                }
            };
            snaps.insert(path.clone(), snap);
        }

        if let Some(prev) = &self.prev_tree {
            let from = self.releases.last().expect("prev tree implies prev release");
            let pair_diff = diff_trees(prev, &tree, from, &release, self.scope);

            for (tool, state) in self.registry.iter().zip(&mut self.states) {
                let (earlier, later) = state.stats.split_at(state.stats.len() - 1);
                let prev_stats = earlier.last().expect("stats per release");
                let next_stats = &later[0];

                let mut records: Vec<ClassChangeRecord> = Vec::new();
                for path in &prev_stats.test_files {
                    let old_bytes = prev.get(path).expect("test file exists in prev tree");
                    let survives = tree.contains(path);
                    let file_changed = match tree.get(path) {
                        Some(new_bytes) => new_bytes != old_bytes,
                        None => true,
                    };
                    let prev_snap = self.prev_snaps.get(path).and_then(|s| s.as_ref());
                    let next_snap = if survives {
                        snaps.get(path).and_then(|s| s.as_ref())
                    } else {
                        None
                    };
                    let record = match (prev_snap, next_snap, survives) {
                        (Some(p), Some(n), true) => classify_class(
                            path,
                            p,
                            Some(n),
                            file_changed,
                            self.flags.annotated_only,
                        ),
                        (Some(p), None, false) => {
                            classify_class(path, p, None, true, self.flags.annotated_only)
                        }
                        // Extraction failed on a side we needed.
                        _ => unanalyzable_record(path, file_changed && survives),
                    };
                    state.history.observe_record(&record);
                    state.ledger.push(build_record(
                        &self.repo_id,
                        &tool.name,
                        &from.name,
                        &release.name,
                        &record,
                    ));
                    records.push(record);
                }

                let added_test_files: BTreeSet<String> = next_stats
                    .test_files
                    .iter()
                    .filter(|p| !prev.contains(p))
                    .cloned()
                    .collect();

                let pair = pair_metrics(&PairInputs {
                    pair_diff: &pair_diff,
                    prev_stats,
                    next_stats,
                    change_records: &records,
                    added_test_files: &added_test_files,
                    exclude_new_files: self.flags.exclude_new_files,
                })?;
                state.pairs.push(pair);
            }
        }

        self.prev_snaps = snaps;
        self.prev_tree = Some(tree);
        self.releases.push(release);
        Ok(())
    }

    pub fn finish(self) -> Result<RepoAnalysis> {
        if self.releases.is_empty() {
            return Err(Error::NoReleases);
        }
        let ntr = self.releases.len() as u64;
        let mut tools = Vec::new();
        for (tool, state) in self.registry.iter().zip(self.states) {
            let master = state.stats.last().expect("one stats entry per release");
            if master.ntc == 0 {
                continue; // not a member of this tool's set
            }
            let report = project_report(&ProjectInputs {
                repo: &self.repo_id,
                tool: &tool.name,
                ntr,
                series: &state.pairs,
                class_history: &state.history,
                master,
            })?;
            tools.push(ToolAnalysis {
                tool: tool.name.clone(),
                stats: state.stats,
                pairs: state.pairs,
                ledger: state.ledger,
                report,
            });
        }
        Ok(RepoAnalysis {
            repo: self.repo_id,
            releases: self.releases,
            tools,
            extraction_failures: self.extraction_failures,
        })
    }
}

/// Walk every consecutive release pair of a repository and compute the full
/// metric series for each member tool.
pub fn analyze_repository(
    git: &GitRepo,
    repo_id: &str,
    registry: &[ToolSpec],
    scope: &ProjectScope,
    flags: AnalysisFlags,
) -> Result<RepoAnalysis> {
    let releases = git.list_releases()?;
    let mut walk = ReleaseWalk::new(repo_id, registry, scope, flags);
    for release in releases {
        let tree = git.snapshot(&release)?;
        walk.push(release, tree)?;
    }
    walk.finish()
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepoOutcome {
    Analyzed,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepoStatus {
    pub host_id: String,
    pub status: RepoOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tools: Vec<String>,
    #[serde(default)]
    pub extraction_failures: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Size of the filtered corpus (the TD denominator).
    pub total_context: u64,
    pub repos: Vec<RepoStatus>,
}

impl RunManifest {
    pub fn count(&self, outcome: RepoOutcome) -> usize {
        self.repos.iter().filter(|r| r.status == outcome).count()
    }
}

/// Result of a full run, with everything also written to the output
/// directory.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub analyses: Vec<RepoAnalysis>,
    pub summaries: Vec<ToolSummary>,
    pub overall: OverallRow,
}

impl RunOutcome {
    pub fn analyzed_count(&self) -> usize {
        self.manifest.count(RepoOutcome::Analyzed)
    }
}

enum RepoResult {
    Analyzed(Box<RepoAnalysis>),
    Skipped(String),
    Failed(String),
}

/// Bounded worker pool preserving input order; a panicking job is isolated
/// into its own result.
fn run_pool<T, R, F>(items: Vec<T>, jobs: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let items_ref = &items;
    let work_ref = &work;

    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(items.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= items_ref.len() {
                    break;
                }
                let result = work_ref(&items_ref[idx]);
                results.lock().expect("pool lock")[idx] = Some(result);
            });
        }
    });

    results
        .into_inner()
        .expect("pool lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn discover_corpus(config: &RunConfig) -> Result<Vec<RepoRef>> {
    match config.corpus_source()? {
        CorpusSource::FixtureIndex { dir, query } => {
            let backend = FixtureIndexBackend::new(dir);
            discover(&backend, &query, 1)
        }
        CorpusSource::HostingQuery { query, page_limit, base_url } => {
            let backend = HostingApiBackend::new(base_url);
            discover(&backend, &query, page_limit)
        }
        CorpusSource::Repos(mut repos) => {
            repos.sort_by(|a, b| a.host_id.cmp(&b.host_id));
            Ok(repos)
        }
    }
}

/// Run the whole pipeline from a validated config: produces pairs.csv,
/// projects.csv, tools.csv (plus JSON mirrors), change_ledger.jsonl and
/// run_manifest.json under the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let started = now_unix();
    let repos = discover_corpus(config)?;

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|_| Error::OutputUnwritable(config.output_dir.clone()))?;

    let registry = config.registry();
    let scope = config.project_scope();
    let filter = config.filter();
    let flags = AnalysisFlags {
        annotated_only: config.flags.annotated_only,
        exclude_new_files: config.flags.exclude_new_files,
        case_sensitive_keywords: config.flags.case_sensitive_keywords,
    };
    let cache_dir = config.cache_dir.clone();

    let job = |repo: &RepoRef| -> RepoResult {
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| -> RepoResult {
            let fetched = match fetch(repo, &cache_dir) {
                Ok(f) => f,
                Err(e) => return RepoResult::Failed(e.to_string()),
            };
            match passes_filter(&fetched, &filter) {
                Ok(FilterDecision::Pass) => {}
                Ok(FilterDecision::Reject(reason)) => {
                    return RepoResult::Skipped(reason.to_string())
                }
                Err(e) => return RepoResult::Failed(e.to_string()),
            }
            let path = fetched.local_path.as_ref().expect("fetched repo has a path");
            let git = match GitRepo::open(path) {
                Ok(g) => g,
                Err(e) => return RepoResult::Failed(e.to_string()),
            };
            match analyze_repository(&git, &fetched.host_id, &registry, &scope, flags) {
                Ok(analysis) => RepoResult::Analyzed(Box::new(analysis)),
                Err(e) => RepoResult::Failed(e.to_string()),
            }
        }));
        outcome.unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            RepoResult::Failed(format!("panic: {msg}"))
        })
    };

    let results = run_pool(repos.clone(), config.jobs(), job);

    let mut statuses = Vec::new();
    let mut analyses = Vec::new();
    for (repo, result) in repos.iter().zip(results) {
        match result {
            RepoResult::Analyzed(analysis) => {
                statuses.push(RepoStatus {
                    host_id: repo.host_id.clone(),
                    status: RepoOutcome::Analyzed,
                    reason: None,
                    tools: analysis.tools.iter().map(|t| t.tool.clone()).collect(),
                    extraction_failures: analysis.extraction_failures,
                });
                analyses.push(*analysis);
            }
            RepoResult::Skipped(reason) => statuses.push(RepoStatus {
                host_id: repo.host_id.clone(),
                status: RepoOutcome::Skipped,
                reason: Some(reason),
                tools: Vec::new(),
                extraction_failures: 0,
            }),
            RepoResult::Failed(reason) => {
                log::error!("{}: {reason}", repo.host_id);
                statuses.push(RepoStatus {
                    host_id: repo.host_id.clone(),
                    status: RepoOutcome::Failed,
                    reason: Some(reason),
                    tools: Vec::new(),
                    extraction_failures: 0,
                });
            }
        }
    }

    // The TD denominator: every repo that made it through the filters.
    let total_context = statuses
        .iter()
        .filter(|s| s.status == RepoOutcome::Analyzed)
        .count() as u64;

    let mut summaries = Vec::new();
    if total_context > 0 {
        for tool in &registry {
            let reports: Vec<ProjectReport> = analyses
                .iter()
                .flat_map(|a| a.tools.iter())
                .filter(|t| t.tool == tool.name)
                .map(|t| t.report.clone())
                .collect();
            summaries.push(tool_summary(&tool.name, &reports, total_context)?);
        }
    }
    let overall = overall_row(&summaries);

    report::write_outputs(&config.output_dir, &analyses, &summaries)?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.config_hash(),
        started_unix: started,
        finished_unix: now_unix(),
        total_context,
        repos: statuses,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(config.output_dir.join("run_manifest.json"), manifest_json)
        .map_err(|_| Error::OutputUnwritable(config.output_dir.join("run_manifest.json")))?;

    Ok(RunOutcome { manifest, analyses, summaries, overall })
}

/// Load a previously written manifest.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text =
        std::fs::read_to_string(path).map_err(|_| Error::MissingInput(path.to_path_buf()))?;
    Ok(serde_json::from_str(&text)?)
}
