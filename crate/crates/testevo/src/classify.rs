//! Method matching across a release pair and the class-change taxonomy.
//!
//! A changed test class is *fragile* when at least one pre-existent method's
//! normalized body changed. Changes confined to comments, imports,
//! declarations or constructors are non-significant; pure additions or
//! removals of methods track new or retired functionality rather than
//! fragility. A renamed method (or a renamed file) matches nothing and so
//! counts as one deletion plus one addition, never as fragility.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::java::{ClassSnapshot, MethodRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChangeKind {
    MatchedUnchanged,
    MatchedModified,
    Added,
    Deleted,
}

/// One method tracked across a pair. Matched kinds carry both versions.
#[derive(Debug, Clone)]
pub struct MethodChange {
    pub kind: MethodChangeKind,
    pub prev: Option<MethodRecord>,
    pub next: Option<MethodRecord>,
}

impl MethodChange {
    pub fn record(&self) -> &MethodRecord {
        self.prev.as_ref().or(self.next.as_ref()).expect("change carries a record")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeCategory {
    /// File bytes identical across the pair.
    Unchanged,
    /// File changed, but every counted method body matched unchanged and no
    /// methods were added or removed.
    NonSignificant,
    AddOnly,
    RemoveOnly,
    AddRemoveOnly,
    /// At least one pre-existent method body changed.
    Fragile,
    /// File present in the earlier release only; excluded from MC/MCMM and
    /// kept for lifespan bookkeeping.
    Deleted,
}

/// Classification of one test file across one release pair.
#[derive(Debug, Clone)]
pub struct ClassChangeRecord {
    pub path: String,
    pub category: ChangeCategory,
    pub method_changes: Vec<MethodChange>,
    /// Modified counted methods (the MM contribution).
    pub mm: u64,
    pub methods_added: u64,
    pub methods_deleted: u64,
    /// Counted methods in the previous/next version (TM contributions).
    pub tm_prev: u64,
    pub tm_next: u64,
    /// True when method-level analysis was impossible (extraction failed on
    /// either side); the change is then treated as non-significant.
    pub extraction_failed: bool,
}

impl ClassChangeRecord {
    /// Counts toward MC: the file changed and survived into the next release.
    pub fn mc_contribution(&self) -> bool {
        !matches!(self.category, ChangeCategory::Unchanged | ChangeCategory::Deleted)
    }

    /// Counts toward MCMM: fragile per the proxy.
    pub fn mcmm_contribution(&self) -> bool {
        self.category == ChangeCategory::Fragile
    }
}

fn counted(record: &MethodRecord, annotated_only: bool) -> bool {
    !record.is_constructor && (!annotated_only || record.has_test_annotation())
}

/// Match methods by signature `(name, arity, param_types)` across two
/// versions of a file. Within one signature group, identical bodies pair
/// first; the remainder pairs in source order as modified; leftovers become
/// deletions or additions.
pub fn match_methods(prev: &ClassSnapshot, next: &ClassSnapshot) -> Vec<MethodChange> {
    type Key = (String, usize, Vec<String>);
    let mut groups: BTreeMap<Key, (Vec<&MethodRecord>, Vec<&MethodRecord>)> = BTreeMap::new();
    for m in &prev.methods {
        groups.entry(m.signature()).or_default().0.push(m);
    }
    for m in &next.methods {
        groups.entry(m.signature()).or_default().1.push(m);
    }

    let mut changes = Vec::new();
    for (_, (old, new)) in groups {
        let mut new_taken = vec![false; new.len()];
        let mut old_pending = Vec::new();

        for o in &old {
            let identical = new.iter().enumerate().find(|(idx, n)| {
                !new_taken[*idx] && n.normalized_body == o.normalized_body
            });
            match identical {
                Some((idx, n)) => {
                    new_taken[idx] = true;
                    changes.push(MethodChange {
                        kind: MethodChangeKind::MatchedUnchanged,
                        prev: Some((*o).clone()),
                        next: Some((*n).clone()),
                    });
                }
                None => old_pending.push(*o),
            }
        }

        let mut new_pending: Vec<&MethodRecord> = new
            .iter()
            .enumerate()
            .filter(|(idx, _)| !new_taken[*idx])
            .map(|(_, n)| *n)
            .collect();

        while let Some(o) = old_pending.first().copied() {
            old_pending.remove(0);
            if new_pending.is_empty() {
                changes.push(MethodChange {
                    kind: MethodChangeKind::Deleted,
                    prev: Some(o.clone()),
                    next: None,
                });
            } else {
                let n = new_pending.remove(0);
                changes.push(MethodChange {
                    kind: MethodChangeKind::MatchedModified,
                    prev: Some(o.clone()),
                    next: Some(n.clone()),
                });
            }
        }
        for n in new_pending {
            changes.push(MethodChange {
                kind: MethodChangeKind::Added,
                prev: None,
                next: Some(n.clone()),
            });
        }
    }
    changes
}

/// Classify one test file across a pair. `next` is `None` when the file was
/// deleted. `file_changed` must be the byte-level comparison of the two blob
/// contents.
pub fn classify_class(
    path: &str,
    prev: &ClassSnapshot,
    next: Option<&ClassSnapshot>,
    file_changed: bool,
    annotated_only: bool,
) -> ClassChangeRecord {
    let tm_prev = prev.test_method_count(annotated_only);

    let Some(next) = next else {
        let method_changes: Vec<MethodChange> = prev
            .methods
            .iter()
            .map(|m| MethodChange {
                kind: MethodChangeKind::Deleted,
                prev: Some(m.clone()),
                next: None,
            })
            .collect();
        return ClassChangeRecord {
            path: path.to_string(),
            category: ChangeCategory::Deleted,
            method_changes,
            mm: 0,
            methods_added: 0,
            methods_deleted: 0,
            tm_prev,
            tm_next: 0,
            extraction_failed: false,
        };
    };

    let tm_next = next.test_method_count(annotated_only);

    if !file_changed {
        return ClassChangeRecord {
            path: path.to_string(),
            category: ChangeCategory::Unchanged,
            method_changes: Vec::new(),
            mm: 0,
            methods_added: 0,
            methods_deleted: 0,
            tm_prev,
            tm_next,
            extraction_failed: false,
        };
    }

    let method_changes = match_methods(prev, next);
    let mut mm = 0u64;
    let mut added = 0u64;
    let mut deleted = 0u64;
    for change in &method_changes {
        if !counted(change.record(), annotated_only) {
            continue; // constructor (or unannotated under annotated_only)
        }
        match change.kind {
            MethodChangeKind::MatchedModified => mm += 1,
            MethodChangeKind::Added => added += 1,
            MethodChangeKind::Deleted => deleted += 1,
            MethodChangeKind::MatchedUnchanged => {}
        }
    }

    let category = if mm > 0 {
        ChangeCategory::Fragile
    } else if added > 0 && deleted > 0 {
        ChangeCategory::AddRemoveOnly
    } else if added > 0 {
        ChangeCategory::AddOnly
    } else if deleted > 0 {
        ChangeCategory::RemoveOnly
    } else {
        ChangeCategory::NonSignificant
    };

    ClassChangeRecord {
        path: path.to_string(),
        category,
        method_changes,
        mm,
        methods_added: added,
        methods_deleted: deleted,
        tm_prev,
        tm_next,
        extraction_failed: false,
    }
}

/// Record for a changed test file whose methods could not be extracted on at
/// least one side: counts as a modified class but never as fragile.
pub fn unanalyzable_record(path: &str, file_changed: bool) -> ClassChangeRecord {
    ClassChangeRecord {
        path: path.to_string(),
        category: if file_changed {
            ChangeCategory::NonSignificant
        } else {
            ChangeCategory::Unchanged
        },
        method_changes: Vec::new(),
        mm: 0,
        methods_added: 0,
        methods_deleted: 0,
        tm_prev: 0,
        tm_next: 0,
        extraction_failed: true,
    }
}
