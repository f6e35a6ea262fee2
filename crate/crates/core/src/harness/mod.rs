//! Monte-Carlo studies, price ingestion, application reports and output.

pub mod emit;
pub mod ingest;
pub mod report;
pub mod study;

pub use emit::Format;
pub use ingest::{ingest_prices, log_returns, read_series};
pub use report::{application_report, application_report_with, ApplicationReport, ReportRow};
pub use study::{run_study, run_study_with, Execution, StudyCell, StudyConfig, StudyResult};
