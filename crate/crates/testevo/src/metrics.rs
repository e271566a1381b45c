//! Metric computation at release-pair, project and tool-set level.
//!
//! Ratios carry explicit defined/undefined state (`Option<f64>`): a ratio
//! whose denominator is zero is absent, and absent values never contribute
//! to any average. Churn units are added-plus-deleted lines throughout, so
//! MTLR may exceed 1 while MRTL stays within [0, 1].

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{ChangeCategory, ClassChangeRecord};
use crate::detect::ReleaseTestStats;
use crate::error::{Error, Result};
use crate::history::PairDiff;
use crate::ledger::LedgerRecord;

/// Mean over the defined entries; `None` when nothing is defined.
pub fn mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for v in values.into_iter().flatten() {
        sum += v;
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

/// Lower median: for an even count the lower of the two central values.
pub fn lower_median(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.is_empty() {
        return None;
    }
    defined.sort_by(|a, b| a.partial_cmp(b).expect("metric values are not NaN"));
    Some(defined[(defined.len() - 1) / 2])
}

/// Size-weighted mean over `(weight, value)` pairs, skipping undefined
/// values together with their weights.
pub fn size_weighted_mean(items: impl IntoIterator<Item = (u64, Option<f64>)>) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0u64;
    for (w, v) in items {
        if let Some(v) = v {
            num += w as f64 * v;
            den += w;
        }
    }
    if den == 0 {
        None
    } else {
        Some(num / den as f64)
    }
}

// ---------------------------------------------------------------------------
// Release-pair level
// ---------------------------------------------------------------------------

/// All per-pair metrics for one tool across one consecutive release pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReleasePairMetrics {
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
    /// TLR at the pair's target release; per-project TLR averages run over
    /// these (releases 2..NTR).
    pub tlr_to: Option<f64>,
    pub mtlr: Option<f64>,
    pub mrtl: Option<f64>,
    pub tmr: Option<f64>,
    pub mcr: Option<f64>,
    pub mmr: Option<f64>,
    pub fcr: Option<f64>,
    pub rfcr: Option<f64>,
}

/// Inputs for [`pair_metrics`]. `change_records` must hold exactly one record
/// per test file of the pair's earlier release; `added_test_files` are the
/// target release's test files whose paths did not exist at all in the
/// earlier tree.
pub struct PairInputs<'a> {
    pub pair_diff: &'a PairDiff,
    pub prev_stats: &'a ReleaseTestStats,
    pub next_stats: &'a ReleaseTestStats,
    pub change_records: &'a [ClassChangeRecord],
    pub added_test_files: &'a BTreeSet<String>,
    /// When set, churn of entirely-new test files is excluded from Tdiff.
    pub exclude_new_files: bool,
}

pub fn pair_metrics(inputs: &PairInputs) -> Result<ReleasePairMetrics> {
    let PairInputs { pair_diff, prev_stats, next_stats, change_records, added_test_files, exclude_new_files } =
        inputs;

    if prev_stats.release != pair_diff.from.name {
        return Err(Error::InconsistentInputs(format!(
            "prev stats are for release {:?} but the diff starts at {:?}",
            prev_stats.release, pair_diff.from.name
        )));
    }
    if next_stats.release != pair_diff.to.name {
        return Err(Error::InconsistentInputs(format!(
            "next stats are for release {:?} but the diff ends at {:?}",
            next_stats.release, pair_diff.to.name
        )));
    }
    if change_records.len() != prev_stats.test_files.len()
        || change_records.iter().any(|r| !prev_stats.test_files.contains(&r.path))
    {
        return Err(Error::InconsistentInputs(
            "change records do not cover exactly the earlier release's test files".to_string(),
        ));
    }

    let tdiff = pair_diff.churn_for(|path| {
        prev_stats.test_files.contains(path)
            || (!exclude_new_files && added_test_files.contains(path))
    });

    let mc = change_records.iter().filter(|r| r.mc_contribution()).count() as u64;
    let mcmm = change_records.iter().filter(|r| r.mcmm_contribution()).count() as u64;
    let mm: u64 = change_records.iter().map(|r| r.mm).sum();
    let methods_added: u64 = change_records.iter().map(|r| r.methods_added).sum();
    let methods_deleted: u64 = change_records.iter().map(|r| r.methods_deleted).sum();
    let tm_prev: u64 = change_records.iter().map(|r| r.tm_prev).sum();

    let ttl_prev = prev_stats.ttl;
    let plocs_prev = prev_stats.plocs;
    let ntc_prev = prev_stats.ntc;
    let pdiff = pair_diff.pdiff;
    let tlr_prev = prev_stats.tlr;
    let tlr_to = next_stats.tlr;

    let ratio = |num: u64, den: u64| {
        if den > 0 {
            Some(num as f64 / den as f64)
        } else {
            None
        }
    };

    let mtlr = ratio(tdiff, ttl_prev);
    let has_test_code = tlr_prev.is_some_and(|t| t > 0.0);
    let mrtl = if has_test_code { ratio(tdiff, pdiff) } else { None };
    let tmr = match (mrtl, tlr_prev) {
        (Some(mrtl), Some(tlr)) if tlr > 0.0 => Some(mrtl / tlr),
        _ => None,
    };

    Ok(ReleasePairMetrics {
        from: pair_diff.from.name.clone(),
        to: pair_diff.to.name.clone(),
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
    })
}

// ---------------------------------------------------------------------------
// Project level
// ---------------------------------------------------------------------------

/// Per-class lifespan bookkeeping across a whole project history. A renamed
/// file is a new class because identity is the path.
#[derive(Debug, Clone, Default)]
pub struct ClassHistory {
    pub distinct: BTreeSet<String>,
    pub modified: BTreeSet<String>,
    pub fragile: BTreeSet<String>,
}

impl ClassHistory {
    /// Register the detected test files of one release.
    pub fn observe_release(&mut self, test_files: &BTreeSet<String>) {
        self.distinct.extend(test_files.iter().cloned());
    }

    /// Register one class-change record of a pair.
    pub fn observe_record(&mut self, record: &ClassChangeRecord) {
        if record.mc_contribution() {
            self.modified.insert(record.path.clone());
        }
        if record.mcmm_contribution() {
            self.fragile.insert(record.path.clone());
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectReport {
    pub repo: String,
    pub tool: String,
    pub ntr: u64,
    pub pairs: u64,
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
    /// Averaged only over pairs with at least one modified class (where RFCR
    /// is defined).
    pub avg_rfcr: Option<f64>,
    pub mrr: f64,
    pub frr: f64,
    pub adrr: f64,
    pub tsv: Option<f64>,
    pub tsf: Option<f64>,
    pub distinct_classes: u64,
    pub modified_classes: u64,
    pub fragile_classes: u64,
}

pub struct ProjectInputs<'a> {
    pub repo: &'a str,
    pub tool: &'a str,
    pub ntr: u64,
    pub series: &'a [ReleasePairMetrics],
    pub class_history: &'a ClassHistory,
    /// Stats of the terminal (master) release.
    pub master: &'a ReleaseTestStats,
}

pub fn project_report(inputs: &ProjectInputs) -> Result<ProjectReport> {
    let ProjectInputs { repo, tool, ntr, series, class_history, master } = inputs;
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }

    let ntr_f = *ntr as f64;
    let pairs_with = |pred: &dyn Fn(&ReleasePairMetrics) -> bool| {
        series.iter().filter(|p| pred(p)).count() as f64
    };
    let mrr = pairs_with(&|p| p.mc > 0) / ntr_f;
    let frr = pairs_with(&|p| p.mcmm > 0) / ntr_f;
    let adrr = pairs_with(&|p| p.methods_added + p.methods_deleted > 0) / ntr_f;

    let distinct = class_history.distinct.len() as u64;
    let ratio = |num: u64| {
        if distinct > 0 {
            Some(num as f64 / distinct as f64)
        } else {
            None
        }
    };

    Ok(ProjectReport {
        repo: repo.to_string(),
        tool: tool.to_string(),
        ntr: *ntr,
        pairs: series.len() as u64,
        master_ntc: master.ntc,
        master_ttl: master.ttl,
        master_tlr: master.tlr,
        avg_tlr: mean(series.iter().map(|p| p.tlr_to)),
        avg_mtlr: mean(series.iter().map(|p| p.mtlr)),
        avg_mrtl: mean(series.iter().map(|p| p.mrtl)),
        avg_tmr: mean(series.iter().map(|p| p.tmr)),
        avg_mcr: mean(series.iter().map(|p| p.mcr)),
        avg_mmr: mean(series.iter().map(|p| p.mmr)),
        avg_fcr: mean(series.iter().map(|p| p.fcr)),
        avg_rfcr: mean(series.iter().map(|p| p.rfcr)),
        mrr,
        frr,
        adrr,
        tsv: ratio(class_history.modified.len() as u64),
        tsf: ratio(class_history.fragile.len() as u64),
        distinct_classes: distinct,
        modified_classes: class_history.modified.len() as u64,
        fragile_classes: class_history.fragile.len() as u64,
    })
}

// ---------------------------------------------------------------------------
// Tool-set level
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolSummary {
    pub tool: String,
    pub n: u64,
    pub total_context: u64,
    /// Tool diffusion: n / total_context.
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

pub fn tool_summary(
    tool: &str,
    reports: &[ProjectReport],
    total_context: u64,
) -> Result<ToolSummary> {
    if total_context == 0 {
        return Err(Error::EmptyContext);
    }
    let n = reports.len() as u64;
    let vals = |f: &dyn Fn(&ProjectReport) -> Option<f64>| -> Vec<Option<f64>> {
        reports.iter().map(f).collect()
    };

    let ntr = vals(&|r| Some(r.ntr as f64));
    let ntc = vals(&|r| Some(r.master_ntc as f64));
    let ttl = vals(&|r| Some(r.master_ttl as f64));
    let mtlr_master = vals(&|r| r.master_tlr);

    Ok(ToolSummary {
        tool: tool.to_string(),
        n,
        total_context,
        td: n as f64 / total_context as f64,
        avg_ntr: mean(ntr.clone()),
        med_ntr: lower_median(ntr),
        avg_ntc: mean(ntc.clone()),
        med_ntc: lower_median(ntc),
        avg_ttl: mean(ttl.clone()),
        med_ttl: lower_median(ttl),
        avg_master_tlr: mean(mtlr_master.clone()),
        med_master_tlr: lower_median(mtlr_master),
        avg_tlr: mean(vals(&|r| r.avg_tlr)),
        avg_mtlr: mean(vals(&|r| r.avg_mtlr)),
        avg_mrtl: mean(vals(&|r| r.avg_mrtl)),
        avg_tmr: mean(vals(&|r| r.avg_tmr)),
        avg_mcr: mean(vals(&|r| r.avg_mcr)),
        avg_mmr: mean(vals(&|r| r.avg_mmr)),
        avg_fcr: mean(vals(&|r| r.avg_fcr)),
        avg_rfcr: mean(vals(&|r| r.avg_rfcr)),
        avg_mrr: mean(vals(&|r| Some(r.mrr))),
        avg_tsv: mean(vals(&|r| r.tsv)),
        avg_frr: mean(vals(&|r| Some(r.frr))),
        avg_adrr: mean(vals(&|r| Some(r.adrr))),
        avg_tsf: mean(vals(&|r| r.tsf)),
    })
}

/// The final table row: per-tool values averaged with weights equal to the
/// set sizes. Overlapping sets are weighted as-is, without deduplication.
#[derive(Debug, Clone, Serialize)]
pub struct OverallRow {
    pub n_total: u64,
    pub td: Option<f64>,
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

pub fn overall_row(summaries: &[ToolSummary]) -> OverallRow {
    let n_total: u64 = summaries.iter().map(|s| s.n).sum();
    let w = |f: &dyn Fn(&ToolSummary) -> Option<f64>| {
        size_weighted_mean(summaries.iter().map(|s| (s.n, f(s))))
    };
    let td = summaries
        .first()
        .map(|s| n_total as f64 / s.total_context as f64);
    OverallRow {
        n_total,
        td,
        avg_ntr: w(&|s| s.avg_ntr),
        med_ntr: w(&|s| s.med_ntr),
        avg_ntc: w(&|s| s.avg_ntc),
        med_ntc: w(&|s| s.med_ntc),
        avg_ttl: w(&|s| s.avg_ttl),
        med_ttl: w(&|s| s.med_ttl),
        avg_master_tlr: w(&|s| s.avg_master_tlr),
        med_master_tlr: w(&|s| s.med_master_tlr),
        avg_tlr: w(&|s| s.avg_tlr),
        avg_mtlr: w(&|s| s.avg_mtlr),
        avg_mrtl: w(&|s| s.avg_mrtl),
        avg_tmr: w(&|s| s.avg_tmr),
        avg_mcr: w(&|s| s.avg_mcr),
        avg_mmr: w(&|s| s.avg_mmr),
        avg_fcr: w(&|s| s.avg_fcr),
        avg_rfcr: w(&|s| s.avg_rfcr),
        avg_mrr: w(&|s| s.avg_mrr),
        avg_tsv: w(&|s| s.avg_tsv),
        avg_frr: w(&|s| s.avg_frr),
        avg_adrr: w(&|s| s.avg_adrr),
        avg_tsf: w(&|s| s.avg_tsf),
    }
}

// ---------------------------------------------------------------------------
// Precision and validation sampling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelCategory {
    Refactoring,
    NonGui,
    Gui,
}

impl LabelCategory {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "refactoring" => Ok(Self::Refactoring),
            "non-gui" => Ok(Self::NonGui),
            "gui" => Ok(Self::Gui),
            other => Err(Error::InvalidCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelLevel {
    Class,
    Method,
}

impl LabelLevel {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "class" => Ok(Self::Class),
            "method" => Ok(Self::Method),
            other => Err(Error::InvalidLevel(other.to_string())),
        }
    }
}

/// One manually labeled sample from the validation CSV.
#[derive(Debug, Clone)]
pub struct LabelRow {
    pub record_id: String,
    pub level: LabelLevel,
    pub category: LabelCategory,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelPrecision {
    pub measured: u64,
    pub tp: u64,
    pub fp: u64,
    /// TP / (TP + FP); absent when nothing was measured.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecisionReport {
    pub classes: LevelPrecision,
    pub methods: LevelPrecision,
}

/// Precision of the fragility proxy against manual labels, computed
/// separately for class- and method-level samples. Every label must resolve
/// against the change ledger.
pub fn precision(ledger: &[LedgerRecord], labels: &[LabelRow]) -> Result<PrecisionReport> {
    let class_ids: BTreeSet<&str> = ledger.iter().map(|r| r.id.as_str()).collect();
    let method_ids: BTreeSet<&str> = ledger
        .iter()
        .flat_map(|r| r.methods.iter().filter_map(|m| m.id.as_deref()))
        .collect();

    let mut levels = [(0u64, 0u64); 2]; // (tp, fp) for class, method
    for label in labels {
        let (known, slot) = match label.level {
            LabelLevel::Class => (class_ids.contains(label.record_id.as_str()), 0),
            LabelLevel::Method => (method_ids.contains(label.record_id.as_str()), 1),
        };
        if !known {
            return Err(Error::UnknownRecordId(label.record_id.clone()));
        }
        if label.category == LabelCategory::Gui {
            levels[slot].0 += 1;
        } else {
            levels[slot].1 += 1;
        }
    }

    let build = |(tp, fp): (u64, u64)| {
        let measured = tp + fp;
        LevelPrecision {
            measured,
            tp,
            fp,
            precision: if measured > 0 { Some(tp as f64 / measured as f64) } else { None },
        }
    };
    Ok(PrecisionReport { classes: build(levels[0]), methods: build(levels[1]) })
}

/// Draw `k` distinct fragile-class record ids, uniformly and reproducibly
/// under `seed`.
pub fn sample_for_validation(ledger: &[LedgerRecord], k: usize, seed: u64) -> Result<Vec<String>> {
    let mut eligible: Vec<&str> = ledger
        .iter()
        .filter(|r| r.category == ChangeCategory::Fragile)
        .map(|r| r.id.as_str())
        .collect();
    eligible.sort_unstable();
    eligible.dedup();

    if k > eligible.len() {
        return Err(Error::InsufficientRecords { requested: k, eligible: eligible.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, eligible.len(), k);
    Ok(picked.iter().map(|i| eligible[i].to_string()).collect())
}
