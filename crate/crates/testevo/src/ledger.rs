//! Per-pair change ledger: one JSON-lines record per test file per release
//! pair per tool. Record ids are content-addressed (repo, tool, pair, path),
//! so they stay stable across reruns and manual label files remain valid.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{ChangeCategory, ClassChangeRecord, MethodChangeKind};
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerMethodEntry {
    /// Present for modified methods only; the addressable unit for
    /// method-level labeling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: MethodChangeKind,
    pub name: String,
    pub param_types: Vec<String>,
    pub is_constructor: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub id: String,
    pub repo: String,
    pub tool: String,
    pub from: String,
    pub to: String,
    pub path: String,
    pub category: ChangeCategory,
    pub mm: u64,
    pub methods_added: u64,
    pub methods_deleted: u64,
    #[serde(default)]
    pub extraction_failed: bool,
    /// Method-level changes (unchanged matches omitted).
    pub methods: Vec<LedgerMethodEntry>,
}

fn digest16(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(&hasher.finalize()[..8])
}

pub fn record_id(repo: &str, tool: &str, from: &str, to: &str, path: &str) -> String {
    digest16(&[repo, tool, from, to, path])
}

pub fn method_id(record_id: &str, signature: &str, occurrence: usize) -> String {
    digest16(&[record_id, signature, &occurrence.to_string()])
}

/// Build the ledger record for one classified test file.
pub fn build_record(
    repo: &str,
    tool: &str,
    from: &str,
    to: &str,
    record: &ClassChangeRecord,
) -> LedgerRecord {
    let id = record_id(repo, tool, from, to, &record.path);
    let mut occurrence: BTreeMap<String, usize> = BTreeMap::new();
    let methods = record
        .method_changes
        .iter()
        .filter(|c| c.kind != MethodChangeKind::MatchedUnchanged)
        .map(|c| {
            let rec = c.record();
            let signature = rec.signature_string();
            let entry_id = if c.kind == MethodChangeKind::MatchedModified {
                let n = occurrence.entry(signature.clone()).or_insert(0);
                let id = method_id(&id, &signature, *n);
                *n += 1;
                Some(id)
            } else {
                None
            };
            LedgerMethodEntry {
                id: entry_id,
                kind: c.kind,
                name: rec.name.clone(),
                param_types: rec.param_types.clone(),
                is_constructor: rec.is_constructor,
            }
        })
        .collect();

    LedgerRecord {
        id,
        repo: repo.to_string(),
        tool: tool.to_string(),
        from: from.to_string(),
        to: to.to_string(),
        path: record.path.clone(),
        category: record.category,
        mm: record.mm,
        methods_added: record.methods_added,
        methods_deleted: record.methods_deleted,
        extraction_failed: record.extraction_failed,
        methods,
    }
}

pub fn write_jsonl<W: Write>(mut writer: W, records: &[LedgerRecord]) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<LedgerRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|_| crate::error::Error::MissingInput(path.to_path_buf()))?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}
