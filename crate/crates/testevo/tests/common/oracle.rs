//! Independent brute-force metric calculator.
//!
//! Works only from the declared fixture structure plus raw
//! `git diff --numstat --no-renames` output; shares no code with the
//! analyzer. Every formula is spelled out with plain loops so disagreement
//! points at the implementation, not the oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use super::javafix::MethodFixture;
use super::{git_numstat, RepoFixture};

#[derive(Debug, Clone)]
pub struct OracleRepo {
    pub fixture: RepoFixture,
    /// The original (non-clone) repository directory, for numstat.
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct OraclePair {
    pub from: String,
    pub to: String,
    pub tdiff: u64,
    pub pdiff: u64,
    pub ttl_prev: u64,
    pub plocs_prev: u64,
    pub ntc_prev: u64,
    pub tm_prev: u64,
    pub mc: u64,
    pub mcmm: u64,
    pub mm: u64,
    pub methods_added: u64,
    pub methods_deleted: u64,
    pub tlr_prev: Option<f64>,
    pub tlr_to: Option<f64>,
    pub mtlr: Option<f64>,
    pub mrtl: Option<f64>,
    pub tmr: Option<f64>,
    pub mcr: Option<f64>,
    pub mmr: Option<f64>,
    pub fcr: Option<f64>,
    pub rfcr: Option<f64>,
    /// path -> category string (kebab-case, as the ledger serializes it).
    pub categories: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct OracleProject {
    pub ntr: u64,
    pub master_ntc: u64,
    pub master_ttl: u64,
    pub master_tlr: Option<f64>,
    pub avg_tlr: Option<f64>,
    pub avg_mtlr: Option<f64>,
    pub avg_mrtl: Option<f64>,
    pub avg_tmr: Option<f64>,
    pub avg_mcr: Option<f64>,
    pub avg_mmr: Option<f64>,
    pub avg_fcr: Option<f64>,
    pub avg_rfcr: Option<f64>,
    pub mrr: f64,
    pub frr: f64,
    pub adrr: f64,
    pub tsv: Option<f64>,
    pub tsf: Option<f64>,
}

fn line_count(text: &str) -> u64 {
    if text.is_empty() {
        return 0;
    }
    let newlines = text.bytes().filter(|b| *b == b'\n').count() as u64;
    if text.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den > 0 {
        Some(num as f64 / den as f64)
    } else {
        None
    }
}

fn release_git_ref(fixture: &RepoFixture, index: usize) -> String {
    match fixture.releases[index].tag {
        Some(tag) => tag.to_string(),
        None => "HEAD".to_string(),
    }
}

/// Test-file paths of one release for one tool, per declaration.
fn test_files(fixture: &RepoFixture, index: usize, tool: &str) -> BTreeSet<String> {
    fixture.releases[index]
        .files
        .iter()
        .filter(|(_, f)| f.java().is_some_and(|j| j.tools.contains(&tool)))
        .map(|(p, _)| p.clone())
        .collect()
}

fn plocs(fixture: &RepoFixture, index: usize) -> u64 {
    fixture.releases[index]
        .files
        .iter()
        .filter(|(p, _)| p.ends_with(".java"))
        .map(|(_, f)| line_count(&f.render()))
        .sum()
}

fn ttl(fixture: &RepoFixture, index: usize, files: &BTreeSet<String>) -> u64 {
    fixture.releases[index]
        .files
        .iter()
        .filter(|(p, _)| files.contains(*p))
        .map(|(_, f)| line_count(&f.render()))
        .sum()
}

fn counted_methods(methods: &[MethodFixture]) -> u64 {
    methods.iter().filter(|m| !m.is_constructor).count() as u64
}

struct FileChange {
    category: String,
    modified: u64,
    added: u64,
    deleted: u64,
}

/// Compare one test file across a pair using only the declared structure.
fn classify(
    fixture: &RepoFixture,
    path: &str,
    prev_idx: usize,
    next_idx: usize,
) -> FileChange {
    let prev_file = &fixture.releases[prev_idx].files[path];
    let Some(next_file) = fixture.releases[next_idx].files.get(path) else {
        return FileChange { category: "deleted".to_string(), modified: 0, added: 0, deleted: 0 };
    };
    if prev_file.render() == next_file.render() {
        return FileChange { category: "unchanged".to_string(), modified: 0, added: 0, deleted: 0 };
    }

    let prev = prev_file.java().expect("test files are java fixtures");
    let next = next_file.java().expect("test files are java fixtures");
    let prev_map: BTreeMap<_, _> = prev.methods.iter().map(|m| (m.key(), m)).collect();
    let next_map: BTreeMap<_, _> = next.methods.iter().map(|m| (m.key(), m)).collect();
    assert_eq!(prev_map.len(), prev.methods.len(), "fixture keys must be unique");
    assert_eq!(next_map.len(), next.methods.len(), "fixture keys must be unique");

    let mut modified = 0;
    let mut added = 0;
    let mut deleted = 0;
    for (key, m) in &prev_map {
        if m.is_constructor {
            continue;
        }
        match next_map.get(key) {
            Some(n) => {
                if n.body != m.body {
                    modified += 1;
                }
            }
            None => deleted += 1,
        }
    }
    for (key, n) in &next_map {
        if !n.is_constructor && !prev_map.contains_key(key) {
            added += 1;
        }
    }

    let category = if modified > 0 {
        "fragile"
    } else if added > 0 && deleted > 0 {
        "add-remove-only"
    } else if added > 0 {
        "add-only"
    } else if deleted > 0 {
        "remove-only"
    } else {
        "non-significant"
    };
    FileChange { category: category.to_string(), modified, added, deleted }
}

pub fn oracle_pairs(repo: &OracleRepo, tool: &str) -> Vec<OraclePair> {
    let fixture = &repo.fixture;
    let mut pairs = Vec::new();
    for i in 1..fixture.releases.len() {
        let prev_files = test_files(fixture, i - 1, tool);
        let next_files = test_files(fixture, i, tool);

        let numstat = git_numstat(
            &repo.dir,
            &release_git_ref(fixture, i - 1),
            &release_git_ref(fixture, i),
        );
        let pdiff: u64 = numstat
            .iter()
            .filter(|(_, _, p)| p.ends_with(".java"))
            .map(|(a, d, _)| a + d)
            .sum();
        let prev_tree: BTreeSet<&String> = fixture.releases[i - 1].files.keys().collect();
        let tdiff: u64 = numstat
            .iter()
            .filter(|(_, _, p)| {
                prev_files.contains(p) || (next_files.contains(p) && !prev_tree.contains(p))
            })
            .map(|(a, d, _)| a + d)
            .sum();

        let mut mc = 0u64;
        let mut mcmm = 0u64;
        let mut mm = 0u64;
        let mut methods_added = 0u64;
        let mut methods_deleted = 0u64;
        let mut tm_prev = 0u64;
        let mut categories = BTreeMap::new();
        for path in &prev_files {
            let prev_java =
                fixture.releases[i - 1].files[path].java().expect("test file is java");
            tm_prev += counted_methods(&prev_java.methods);
            let change = classify(fixture, path, i - 1, i);
            if !matches!(change.category.as_str(), "unchanged" | "deleted") {
                mc += 1;
            }
            if change.category == "fragile" {
                mcmm += 1;
            }
            if change.category != "deleted" {
                mm += change.modified;
                methods_added += change.added;
                methods_deleted += change.deleted;
            }
            categories.insert(path.clone(), change.category);
        }

        let ttl_prev = ttl(fixture, i - 1, &prev_files);
        let plocs_prev = plocs(fixture, i - 1);
        let ntc_prev = prev_files.len() as u64;
        let tlr_prev = ratio(ttl_prev, plocs_prev);
        let plocs_next = plocs(fixture, i);
        let tlr_to = ratio(ttl(fixture, i, &next_files), plocs_next);

        let mtlr = ratio(tdiff, ttl_prev);
        let mrtl = if tlr_prev.is_some_and(|t| t > 0.0) { ratio(tdiff, pdiff) } else { None };
        let tmr = match (mrtl, tlr_prev) {
            (Some(m), Some(t)) if t > 0.0 => Some(m / t),
            _ => None,
        };

        pairs.push(OraclePair {
            from: fixture.releases[i - 1].release_name().to_string(),
            to: fixture.releases[i].release_name().to_string(),
            tdiff,
            pdiff,
            ttl_prev,
            plocs_prev,
            ntc_prev,
            tm_prev,
            mc,
            mcmm,
            mm,
            methods_added,
            methods_deleted,
            tlr_prev,
            tlr_to,
            mtlr,
            mrtl,
            tmr,
            mcr: ratio(mc, ntc_prev),
            mmr: ratio(mm, tm_prev),
            fcr: ratio(mcmm, ntc_prev),
            rfcr: ratio(mcmm, mc),
            categories,
        });
    }
    pairs
}

fn avg(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// True when the tool has test files on the terminal release (set
/// membership).
pub fn is_member(repo: &OracleRepo, tool: &str) -> bool {
    !test_files(&repo.fixture, repo.fixture.releases.len() - 1, tool).is_empty()
}

pub fn oracle_project(repo: &OracleRepo, tool: &str) -> Option<OracleProject> {
    if !is_member(repo, tool) {
        return None;
    }
    let fixture = &repo.fixture;
    let pairs = oracle_pairs(repo, tool);
    let ntr = fixture.releases.len() as u64;

    let mut distinct: BTreeSet<String> = BTreeSet::new();
    for i in 0..fixture.releases.len() {
        distinct.extend(test_files(fixture, i, tool));
    }
    let mut modified: BTreeSet<String> = BTreeSet::new();
    let mut fragile: BTreeSet<String> = BTreeSet::new();
    for pair in &pairs {
        for (path, category) in &pair.categories {
            if !matches!(category.as_str(), "unchanged" | "deleted") {
                modified.insert(path.clone());
            }
            if category == "fragile" {
                fragile.insert(path.clone());
            }
        }
    }

    let last = fixture.releases.len() - 1;
    let master_files = test_files(fixture, last, tool);
    let master_ttl = ttl(fixture, last, &master_files);
    let master_plocs = plocs(fixture, last);

    let count_pairs = |pred: &dyn Fn(&OraclePair) -> bool| pairs.iter().filter(|p| pred(p)).count() as f64;

    Some(OracleProject {
        ntr,
        master_ntc: master_files.len() as u64,
        master_ttl,
        master_tlr: ratio(master_ttl, master_plocs),
        avg_tlr: avg(&pairs.iter().map(|p| p.tlr_to).collect::<Vec<_>>()),
        avg_mtlr: avg(&pairs.iter().map(|p| p.mtlr).collect::<Vec<_>>()),
        avg_mrtl: avg(&pairs.iter().map(|p| p.mrtl).collect::<Vec<_>>()),
        avg_tmr: avg(&pairs.iter().map(|p| p.tmr).collect::<Vec<_>>()),
        avg_mcr: avg(&pairs.iter().map(|p| p.mcr).collect::<Vec<_>>()),
        avg_mmr: avg(&pairs.iter().map(|p| p.mmr).collect::<Vec<_>>()),
        avg_fcr: avg(&pairs.iter().map(|p| p.fcr).collect::<Vec<_>>()),
        avg_rfcr: avg(&pairs.iter().map(|p| p.rfcr).collect::<Vec<_>>()),
        mrr: count_pairs(&|p| p.mc > 0) / ntr as f64,
        frr: count_pairs(&|p| p.mcmm > 0) / ntr as f64,
        adrr: count_pairs(&|p| p.methods_added + p.methods_deleted > 0) / ntr as f64,
        tsv: ratio(modified.len() as u64, distinct.len() as u64),
        tsf: ratio(fragile.len() as u64, distinct.len() as u64),
    })
}

#[derive(Debug, Clone)]
pub struct OracleTool {
    pub tool: String,
    pub n: u64,
    pub td: f64,
    pub avg_ntr: Option<f64>,
    pub med_ntr: Option<f64>,
    pub avg_ntc: Option<f64>,
    pub med_ntc: Option<f64>,
    pub avg_ttl: Option<f64>,
    pub med_ttl: Option<f64>,
    pub avg_master_tlr: Option<f64>,
    pub med_master_tlr: Option<f64>,
    pub avg_tlr: Option<f64>,
    pub avg_mtlr: Option<f64>,
    pub avg_mrtl: Option<f64>,
    pub avg_tmr: Option<f64>,
    pub avg_mcr: Option<f64>,
    pub avg_mmr: Option<f64>,
    pub avg_fcr: Option<f64>,
    pub avg_rfcr: Option<f64>,
    pub avg_mrr: Option<f64>,
    pub avg_tsv: Option<f64>,
    pub avg_frr: Option<f64>,
    pub avg_adrr: Option<f64>,
    pub avg_tsf: Option<f64>,
}

fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(sorted[(sorted.len() - 1) / 2])
}

pub fn oracle_tool(repos: &[OracleRepo], tool: &str, total_context: u64) -> OracleTool {
    let projects: Vec<OracleProject> =
        repos.iter().filter_map(|r| oracle_project(r, tool)).collect();
    let n = projects.len() as u64;
    let gather = |f: &dyn Fn(&OracleProject) -> Option<f64>| -> Vec<Option<f64>> {
        projects.iter().map(f).collect()
    };
    let defined = |vals: &[Option<f64>]| -> Vec<f64> { vals.iter().flatten().copied().collect() };

    let ntr = gather(&|p| Some(p.ntr as f64));
    let ntc = gather(&|p| Some(p.master_ntc as f64));
    let ttl = gather(&|p| Some(p.master_ttl as f64));
    let mtlr = gather(&|p| p.master_tlr);

    OracleTool {
        tool: tool.to_string(),
        n,
        td: n as f64 / total_context as f64,
        avg_ntr: avg(&ntr),
        med_ntr: lower_median(&defined(&ntr)),
        avg_ntc: avg(&ntc),
        med_ntc: lower_median(&defined(&ntc)),
        avg_ttl: avg(&ttl),
        med_ttl: lower_median(&defined(&ttl)),
        avg_master_tlr: avg(&mtlr),
        med_master_tlr: lower_median(&defined(&mtlr)),
        avg_tlr: avg(&gather(&|p| p.avg_tlr)),
        avg_mtlr: avg(&gather(&|p| p.avg_mtlr)),
        avg_mrtl: avg(&gather(&|p| p.avg_mrtl)),
        avg_tmr: avg(&gather(&|p| p.avg_tmr)),
        avg_mcr: avg(&gather(&|p| p.avg_mcr)),
        avg_mmr: avg(&gather(&|p| p.avg_mmr)),
        avg_fcr: avg(&gather(&|p| p.avg_fcr)),
        avg_rfcr: avg(&gather(&|p| p.avg_rfcr)),
        avg_mrr: avg(&gather(&|p| Some(p.mrr))),
        avg_tsv: avg(&gather(&|p| p.tsv)),
        avg_frr: avg(&gather(&|p| Some(p.frr))),
        avg_adrr: avg(&gather(&|p| Some(p.adrr))),
        avg_tsf: avg(&gather(&|p| p.tsf)),
    }
}

/// Weighted overall value for one column across oracle tool rows.
pub fn oracle_weighted(rows: &[(u64, Option<f64>)]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0u64;
    for (w, v) in rows {
        if let Some(v) = v {
            num += *w as f64 * v;
            den += w;
        }
    }
    if den == 0 {
        None
    } else {
        Some(num / den as f64)
    }
}
