//! Machine-readable outputs (CSV with JSON mirrors) and the human summary
//! table.
//!
//! CSV stores ratios as plain fractions; formatting to percentages happens
//! only at render time, so downstream aggregation never accumulates rounding
//! drift. Undefined ratios are empty cells with an explicit `_defined`
//! column. The column sets are closed; any change bumps the schema version
//! in the run manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger;
use crate::metrics::{
    overall_row, LabelCategory, LabelLevel, LabelRow, OverallRow, ReleasePairMetrics,
    ToolSummary,
};
use crate::pipeline::{RepoAnalysis, SCHEMA_VERSION};

// ---------------------------------------------------------------------------
// CSV rows
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
struct PairRow {
    repo: String,
    tool: String,
    from: String,
    to: String,
    tdiff: u64,
    pdiff: u64,
    ttl_prev: u64,
    plocs_prev: u64,
    ntc_prev: u64,
    tm_prev: u64,
    mc: u64,
    mcmm: u64,
    mm: u64,
    methods_added: u64,
    methods_deleted: u64,
    tlr_prev: Option<f64>,
    tlr_prev_defined: bool,
    tlr_to: Option<f64>,
    tlr_to_defined: bool,
    mtlr: Option<f64>,
    mtlr_defined: bool,
    mrtl: Option<f64>,
    mrtl_defined: bool,
    tmr: Option<f64>,
    tmr_defined: bool,
    mcr: Option<f64>,
    mcr_defined: bool,
    mmr: Option<f64>,
    mmr_defined: bool,
    fcr: Option<f64>,
    fcr_defined: bool,
    rfcr: Option<f64>,
    rfcr_defined: bool,
}

impl PairRow {
    fn new(repo: &str, tool: &str, m: &ReleasePairMetrics) -> Self {
        Self {
            repo: repo.to_string(),
            tool: tool.to_string(),
            from: m.from.clone(),
            to: m.to.clone(),
            tdiff: m.tdiff,
            pdiff: m.pdiff,
            ttl_prev: m.ttl_prev,
            plocs_prev: m.plocs_prev,
            ntc_prev: m.ntc_prev,
            tm_prev: m.tm_prev,
            mc: m.mc,
            mcmm: m.mcmm,
            mm: m.mm,
            methods_added: m.methods_added,
            methods_deleted: m.methods_deleted,
            tlr_prev: m.tlr_prev,
            tlr_prev_defined: m.tlr_prev.is_some(),
            tlr_to: m.tlr_to,
            tlr_to_defined: m.tlr_to.is_some(),
            mtlr: m.mtlr,
            mtlr_defined: m.mtlr.is_some(),
            mrtl: m.mrtl,
            mrtl_defined: m.mrtl.is_some(),
            tmr: m.tmr,
            tmr_defined: m.tmr.is_some(),
            mcr: m.mcr,
            mcr_defined: m.mcr.is_some(),
            mmr: m.mmr,
            mmr_defined: m.mmr.is_some(),
            fcr: m.fcr,
            fcr_defined: m.fcr.is_some(),
            rfcr: m.rfcr,
            rfcr_defined: m.rfcr.is_some(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProjectRow {
    repo: String,
    tool: String,
    ntr: u64,
    pairs: u64,
    master_ntc: u64,
    master_ttl: u64,
    master_tlr: Option<f64>,
    master_tlr_defined: bool,
    avg_tlr: Option<f64>,
    avg_tlr_defined: bool,
    avg_mtlr: Option<f64>,
    avg_mtlr_defined: bool,
    avg_mrtl: Option<f64>,
    avg_mrtl_defined: bool,
    avg_tmr: Option<f64>,
    avg_tmr_defined: bool,
    avg_mcr: Option<f64>,
    avg_mcr_defined: bool,
    avg_mmr: Option<f64>,
    avg_mmr_defined: bool,
    avg_fcr: Option<f64>,
    avg_fcr_defined: bool,
    avg_rfcr: Option<f64>,
    avg_rfcr_defined: bool,
    mrr: f64,
    frr: f64,
    adrr: f64,
    tsv: Option<f64>,
    tsv_defined: bool,
    tsf: Option<f64>,
    tsf_defined: bool,
    distinct_classes: u64,
    modified_classes: u64,
    fragile_classes: u64,
}

impl ProjectRow {
    fn new(r: &crate::metrics::ProjectReport) -> Self {
        Self {
            repo: r.repo.clone(),
            tool: r.tool.clone(),
            ntr: r.ntr,
            pairs: r.pairs,
            master_ntc: r.master_ntc,
            master_ttl: r.master_ttl,
            master_tlr: r.master_tlr,
            master_tlr_defined: r.master_tlr.is_some(),
            avg_tlr: r.avg_tlr,
            avg_tlr_defined: r.avg_tlr.is_some(),
            avg_mtlr: r.avg_mtlr,
            avg_mtlr_defined: r.avg_mtlr.is_some(),
            avg_mrtl: r.avg_mrtl,
            avg_mrtl_defined: r.avg_mrtl.is_some(),
            avg_tmr: r.avg_tmr,
            avg_tmr_defined: r.avg_tmr.is_some(),
            avg_mcr: r.avg_mcr,
            avg_mcr_defined: r.avg_mcr.is_some(),
            avg_mmr: r.avg_mmr,
            avg_mmr_defined: r.avg_mmr.is_some(),
            avg_fcr: r.avg_fcr,
            avg_fcr_defined: r.avg_fcr.is_some(),
            avg_rfcr: r.avg_rfcr,
            avg_rfcr_defined: r.avg_rfcr.is_some(),
            mrr: r.mrr,
            frr: r.frr,
            adrr: r.adrr,
            tsv: r.tsv,
            tsv_defined: r.tsv.is_some(),
            tsf: r.tsf,
            tsf_defined: r.tsf.is_some(),
            distinct_classes: r.distinct_classes,
            modified_classes: r.modified_classes,
            fragile_classes: r.fragile_classes,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ToolRow {
    tool: String,
    n: u64,
    total_context: u64,
    td: f64,
    avg_ntr: Option<f64>,
    avg_ntr_defined: bool,
    med_ntr: Option<f64>,
    med_ntr_defined: bool,
    avg_ntc: Option<f64>,
    avg_ntc_defined: bool,
    med_ntc: Option<f64>,
    med_ntc_defined: bool,
    avg_ttl: Option<f64>,
    avg_ttl_defined: bool,
    med_ttl: Option<f64>,
    med_ttl_defined: bool,
    avg_master_tlr: Option<f64>,
    avg_master_tlr_defined: bool,
    med_master_tlr: Option<f64>,
    med_master_tlr_defined: bool,
    avg_tlr: Option<f64>,
    avg_tlr_defined: bool,
    avg_mtlr: Option<f64>,
    avg_mtlr_defined: bool,
    avg_mrtl: Option<f64>,
    avg_mrtl_defined: bool,
    avg_tmr: Option<f64>,
    avg_tmr_defined: bool,
    avg_mcr: Option<f64>,
    avg_mcr_defined: bool,
    avg_mmr: Option<f64>,
    avg_mmr_defined: bool,
    avg_fcr: Option<f64>,
    avg_fcr_defined: bool,
    avg_rfcr: Option<f64>,
    avg_rfcr_defined: bool,
    avg_mrr: Option<f64>,
    avg_mrr_defined: bool,
    avg_tsv: Option<f64>,
    avg_tsv_defined: bool,
    avg_frr: Option<f64>,
    avg_frr_defined: bool,
    avg_adrr: Option<f64>,
    avg_adrr_defined: bool,
    avg_tsf: Option<f64>,
    avg_tsf_defined: bool,
}

impl ToolRow {
    fn new(s: &ToolSummary) -> Self {
        Self {
            tool: s.tool.clone(),
            n: s.n,
            total_context: s.total_context,
            td: s.td,
            avg_ntr: s.avg_ntr,
            avg_ntr_defined: s.avg_ntr.is_some(),
            med_ntr: s.med_ntr,
            med_ntr_defined: s.med_ntr.is_some(),
            avg_ntc: s.avg_ntc,
            avg_ntc_defined: s.avg_ntc.is_some(),
            med_ntc: s.med_ntc,
            med_ntc_defined: s.med_ntc.is_some(),
            avg_ttl: s.avg_ttl,
            avg_ttl_defined: s.avg_ttl.is_some(),
            med_ttl: s.med_ttl,
            med_ttl_defined: s.med_ttl.is_some(),
            avg_master_tlr: s.avg_master_tlr,
            avg_master_tlr_defined: s.avg_master_tlr.is_some(),
            med_master_tlr: s.med_master_tlr,
            med_master_tlr_defined: s.med_master_tlr.is_some(),
            avg_tlr: s.avg_tlr,
            avg_tlr_defined: s.avg_tlr.is_some(),
            avg_mtlr: s.avg_mtlr,
            avg_mtlr_defined: s.avg_mtlr.is_some(),
            avg_mrtl: s.avg_mrtl,
            avg_mrtl_defined: s.avg_mrtl.is_some(),
            avg_tmr: s.avg_tmr,
            avg_tmr_defined: s.avg_tmr.is_some(),
            avg_mcr: s.avg_mcr,
            avg_mcr_defined: s.avg_mcr.is_some(),
            avg_mmr: s.avg_mmr,
            avg_mmr_defined: s.avg_mmr.is_some(),
            avg_fcr: s.avg_fcr,
            avg_fcr_defined: s.avg_fcr.is_some(),
            avg_rfcr: s.avg_rfcr,
            avg_rfcr_defined: s.avg_rfcr.is_some(),
            avg_mrr: s.avg_mrr,
            avg_mrr_defined: s.avg_mrr.is_some(),
            avg_tsv: s.avg_tsv,
            avg_tsv_defined: s.avg_tsv.is_some(),
            avg_frr: s.avg_frr,
            avg_frr_defined: s.avg_frr.is_some(),
            avg_adrr: s.avg_adrr,
            avg_adrr_defined: s.avg_adrr.is_some(),
            avg_tsf: s.avg_tsf,
            avg_tsf_defined: s.avg_tsf.is_some(),
        }
    }

    fn into_summary(self) -> ToolSummary {
        ToolSummary {
            tool: self.tool,
            n: self.n,
            total_context: self.total_context,
            td: self.td,
            avg_ntr: self.avg_ntr,
            med_ntr: self.med_ntr,
            avg_ntc: self.avg_ntc,
            med_ntc: self.med_ntc,
            avg_ttl: self.avg_ttl,
            med_ttl: self.med_ttl,
            avg_master_tlr: self.avg_master_tlr,
            med_master_tlr: self.med_master_tlr,
            avg_tlr: self.avg_tlr,
            avg_mtlr: self.avg_mtlr,
            avg_mrtl: self.avg_mrtl,
            avg_tmr: self.avg_tmr,
            avg_mcr: self.avg_mcr,
            avg_mmr: self.avg_mmr,
            avg_fcr: self.avg_fcr,
            avg_rfcr: self.avg_rfcr,
            avg_mrr: self.avg_mrr,
            avg_tsv: self.avg_tsv,
            avg_frr: self.avg_frr,
            avg_adrr: self.avg_adrr,
            avg_tsf: self.avg_tsf,
        }
    }
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

fn write_csv<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|_| Error::OutputUnwritable(path.to_path_buf()))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapper<'a, T> {
        schema_version: u32,
        rows: &'a [T],
    }
    let body = serde_json::to_string_pretty(&Wrapper { schema_version: SCHEMA_VERSION, rows })?;
    std::fs::write(path, body).map_err(|_| Error::OutputUnwritable(path.to_path_buf()))?;
    Ok(())
}

/// Write pairs.csv, projects.csv, tools.csv, their JSON mirrors and the
/// change ledger. Rows are emitted in (repo, tool, pair) order, which is
/// deterministic for a given cache state.
pub fn write_outputs(
    output_dir: &Path,
    analyses: &[RepoAnalysis],
    summaries: &[ToolSummary],
) -> Result<()> {
    let pair_rows: Vec<PairRow> = analyses
        .iter()
        .flat_map(|a| {
            a.tools.iter().flat_map(move |t| {
                t.pairs.iter().map(move |m| PairRow::new(&a.repo, &t.tool, m))
            })
        })
        .collect();
    write_csv(&output_dir.join("pairs.csv"), pair_rows.iter())?;
    write_json(&output_dir.join("pairs.json"), &pair_rows)?;

    let project_rows: Vec<ProjectRow> = analyses
        .iter()
        .flat_map(|a| a.tools.iter().map(|t| ProjectRow::new(&t.report)))
        .collect();
    write_csv(&output_dir.join("projects.csv"), project_rows.iter())?;
    write_json(&output_dir.join("projects.json"), &project_rows)?;

    let tool_rows: Vec<ToolRow> = summaries.iter().map(ToolRow::new).collect();
    write_csv(&output_dir.join("tools.csv"), tool_rows.iter())?;
    write_json(&output_dir.join("tools.json"), &tool_rows)?;

    let ledger_path = output_dir.join("change_ledger.jsonl");
    let file = std::fs::File::create(&ledger_path)
        .map_err(|_| Error::OutputUnwritable(ledger_path.clone()))?;
    let mut writer = std::io::BufWriter::new(file);
    for analysis in analyses {
        for tool in &analysis.tools {
            ledger::write_jsonl(&mut writer, &tool.ledger)?;
        }
    }
    use std::io::Write;
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Readers
// ---------------------------------------------------------------------------

pub fn read_tools_csv(path: &Path) -> Result<Vec<ToolSummary>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|_| Error::MissingInput(path.to_path_buf()))?;
    let mut summaries = Vec::new();
    for row in reader.deserialize::<ToolRow>() {
        summaries.push(row?.into_summary());
    }
    Ok(summaries)
}

/// Parse a manual label CSV with columns record_id, level, category.
pub fn read_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|_| Error::MissingInput(path.to_path_buf()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::InvalidLabelFile(format!("missing column {name:?}")))
    };
    let id_col = col("record_id")?;
    let level_col = col("level")?;
    let category_col = col("category")?;

    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::InvalidLabelFile("short row".to_string()))
        };
        labels.push(LabelRow {
            record_id: field(id_col)?.trim().to_string(),
            level: LabelLevel::parse(field(level_col)?)?,
            category: LabelCategory::parse(field(category_col)?)?,
        });
    }
    Ok(labels)
}

// ---------------------------------------------------------------------------
// Summary table
// ---------------------------------------------------------------------------

fn group_thousands(value: u64) -> String {
    let digits = value.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn fmt_count(value: Option<f64>) -> String {
    match value {
        Some(v) if v >= 0.0 => group_thousands(v.round() as u64),
        Some(v) => format!("{}", v.round()),
        None => "-".to_string(),
    }
}

pub fn fmt_pct1(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.1}%", v * 100.0),
        None => "-".to_string(),
    }
}

pub fn fmt_pct2(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "-".to_string(),
    }
}

fn avg_med(avg: Option<f64>, med: Option<f64>, pct: bool) -> String {
    if pct {
        format!("{} ({})", fmt_pct1(avg), fmt_pct1(med))
    } else {
        format!("{} ({})", fmt_count(avg), fmt_count(med))
    }
}

/// Render the diffusion/size table: one row per tool with n, TD and
/// "avg (median)" cells for NTR, NTC, TTL and TLR, plus a size-weighted
/// Average row.
pub fn render_summary(summaries: &[ToolSummary]) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    rows.push(
        ["Tool", "n", "TD", "NTR", "NTC", "TTL", "TLR"].iter().map(|s| s.to_string()).collect(),
    );
    for s in summaries {
        rows.push(vec![
            s.tool.clone(),
            group_thousands(s.n),
            fmt_pct2(Some(s.td)),
            avg_med(s.avg_ntr, s.med_ntr, false),
            avg_med(s.avg_ntc, s.med_ntc, false),
            avg_med(s.avg_ttl, s.med_ttl, false),
            avg_med(s.avg_master_tlr, s.med_master_tlr, true),
        ]);
    }
    let overall = overall_row(summaries);
    rows.push(overall_cells(&overall));

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

fn overall_cells(overall: &OverallRow) -> Vec<String> {
    vec![
        "Average".to_string(),
        group_thousands(overall.n_total),
        fmt_pct2(overall.td),
        avg_med(overall.avg_ntr, overall.med_ntr, false),
        avg_med(overall.avg_ntc, overall.med_ntc, false),
        avg_med(overall.avg_ttl, overall.med_ttl, false),
        avg_med(overall.avg_master_tlr, overall.med_master_tlr, true),
    ]
}
