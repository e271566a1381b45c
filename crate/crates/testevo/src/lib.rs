//! testevo mines git histories of Android projects to quantify how scripted
//! GUI test suites spread, evolve and break.
//!
//! For every repository it enumerates tagged releases (plus the branch head
//! as terminal `master` release), detects test files per framework by
//! keyword, extracts Java method bodies without a compiler, classifies each
//! test-class change across consecutive releases, and computes a 17-metric
//! suite covering diffusion (TD, NTR, NTC, TTL, TLR), evolution (MTLR, MRTL,
//! TMR, MRR, TSV) and fragility (MCR, MMR, FCR, RFCR, FRR, ADRR, TSF), plus
//! the precision of the fragility proxy against manual labels.
//!
//! The library is the primary interface; see the runnable programs under
//! `examples/` for each capability:
//!
//! - `extract_methods` — lexer-level Java method extraction
//! - `classify_changes` — method matching and change categories
//! - `detect_tools` — per-framework test detection and size stats
//! - `analyze_repo` — walk a local git repository release by release
//! - `full_pipeline` — fixture corpus to CSV reports end to end
//! - `sample_and_precision` — validation sampling and precision
//!
//! A thin `testevo` binary wraps the pipeline with `analyze`, `summarize`,
//! `sample` and `precision` subcommands.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod history;
pub mod java;
pub mod ledger;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod textdiff;

pub use error::{Error, Result};
