use std::path::PathBuf;

use thiserror::Error;

/// Fatal ingest failures. Per-record problems are reported as
/// [`Diagnostic`](crate::ingest::Diagnostic)s instead.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read archive: {0}")]
    Io(#[from] std::io::Error),
    #[error("archive is not valid UTF-8 at line {line}")]
    Encoding { line: usize },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("empty archive: no valid records")]
    EmptyArchive,
    #[error("unknown archive format `{0}` (expected jsonl or csv)")]
    UnknownFormat(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("snapshot spacing ({spacing_days} d) must be positive and no longer than the trailing window ({trail_days} d)")]
    SpacingExceedsTrail { spacing_days: u32, trail_days: u32 },
    #[error("trailing window of {0} days exceeds 31 days")]
    TrailTooLong(u32),
}

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error("token `{0}` appears in both the positive and the negative lexicon")]
    LexiconOverlap(String),
    #[error("cannot build a dictionary from an empty corpus")]
    EmptyCorpus,
    #[error("failed to read lexicon {path}: {source}")]
    LexiconIo {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("community sets differ between metric tables: {0}")]
    CommunityMismatch(String),
    #[error("unknown panel column `{0}`")]
    UnknownColumn(String),
    #[error("variable `{0}` is constant; its correlation is undefined")]
    DegenerateVariable(String),
    #[error("not enough complete rows ({0}) for factoring")]
    TooFewRows(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid value `{value}` in column `{column}`")]
    InvalidValue { column: String, value: String },
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("outcome `{0}` is also listed as a covariate")]
    OutcomeIsCovariate(String),
    #[error("need at least 2 groups, found {0}")]
    TooFewGroups(usize),
    #[error("need at least {needed} complete rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("{}", rank_message(.column, .collinear_with))]
    RankDeficient {
        column: String,
        collinear_with: Vec<String>,
    },
    #[error("profile likelihood search did not converge after {} evaluations", .trace.len())]
    NonConvergence { trace: Vec<(f64, f64)> },
    #[error(transparent)]
    Panel(#[from] PanelError),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no community specs given")]
    NoSpecs,
    #[error("community {index}: {reason}")]
    Infeasible { index: usize, reason: String },
}

/// Crate-level error used by the pipeline and the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn rank_message(column: &str, collinear_with: &[String]) -> String {
    if collinear_with.is_empty() {
        format!("design matrix is rank deficient: column `{column}` is zero on every complete row")
    } else {
        format!(
            "design matrix is rank deficient: column `{column}` is collinear with [{}]",
            collinear_with.join(", ")
        )
    }
}
