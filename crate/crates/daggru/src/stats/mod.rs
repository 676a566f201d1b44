//! Evaluation and the statistical layer around it: micro-F1 scoring,
//! mean +/- Student-t confidence intervals, Welch's t-test, bootstrap
//! model selection, multi-run studies, and result-table rendering.

mod bootstrap;
mod f1;
mod report;
mod studies;
mod summary;
mod ttest;

pub use bootstrap::{bootstrap_selection, BootstrapSelection};
pub use f1::{micro_f1, Confusion};
pub use report::{
    read_ledger, render_csv, render_text, result_table, write_ledger, TableRow,
};
pub use studies::{seed_study, split_study, StudyOutcome};
pub use summary::{aggregate, ci_halfwidth, Aggregate};
pub use ttest::{welch_t_test, WelchTest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("{test} needs at least {needed} values, got {got}")]
    SampleTooSmall {
        test: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("invalid statistics configuration: {0}")]
    BadConfig(String),
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ledger parse error at {path}:{line}: {msg}")]
    LedgerParse {
        path: String,
        line: usize,
        msg: String,
    },
}
