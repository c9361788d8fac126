//! Monte Carlo over disorder realizations, mergeable statistics, and the
//! ensemble-level estimators and hypothesis tests.

pub mod gamma;
pub mod record;
pub mod reports;
pub mod run;

pub use gamma::{estimate_gamma, GammaEstimate};
pub use record::{read_records, write_records, RecordsHeader, RunRecord, RECORDS_SCHEMA};
pub use reports::{
    bks_reports, bound_suite, clt_report, ez_check, m_checks, overlap_gamma_consistency,
    refinement_report, variance_scaling, TestReport,
};
pub use run::{
    run_ensemble, run_realization, summary_from_parts, EnsembleResult, EnsembleSummary,
    RealizationOutput,
};
