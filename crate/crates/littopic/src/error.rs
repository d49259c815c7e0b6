//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by corpus ingestion, tokenization, model I/O, training and
/// evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record in {path} at {location}: {reason}")]
    MalformedRecord {
        path: PathBuf,
        /// Row (CSV) or line (JSONL) number, 1-based.
        location: u64,
        reason: String,
    },

    #[error("duplicate article id `{id}` (second occurrence in {path})")]
    DuplicateId { id: String, path: PathBuf },

    #[error("unknown topic label `{label}` (valid: {valid})")]
    UnknownLabel { label: String, valid: String },

    #[error("empty corpus: no articles loaded from {0} file(s)")]
    EmptyCorpus(usize),

    #[error("article `{id}` has no labels but labels are required")]
    MissingLabels { id: String },

    #[error("duplicate vocabulary token `{token}` at line {line}")]
    DuplicateToken { token: String, line: usize },

    #[error("vocabulary is missing special token {0}")]
    MissingSpecialToken(&'static str),

    #[error("max_len {max_len} cannot hold {needed} structural tokens")]
    MaxLenTooSmall { max_len: usize, needed: usize },

    #[error("cannot pad an empty batch")]
    EmptyBatch,

    #[error("batch mixes pair-mode and single-mode inputs")]
    MixedBatchModes,

    #[error("invalid model config: {0}")]
    InvalidConfig(String),

    #[error("token id {id} out of vocabulary range {vocab_size}")]
    TokenIdOutOfRange { id: u32, vocab_size: usize },

    #[error("sequence length {len} exceeds max position {max_position}")]
    SequenceTooLong { len: usize, max_position: usize },

    #[error("checkpoint error in {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("non-finite gradient in tensor `{tensor}` at element {index}")]
    NonFiniteGradient { tensor: String, index: usize },

    #[error("no model for topic {0}")]
    MissingTopicModel(&'static str),

    #[error("corpus has no labeled articles; cannot evaluate or fine-tune")]
    UnlabeledCorpus,

    #[error("gold/prediction id mismatch: {0}")]
    IdMismatch(String),

    #[error("relative improvement undefined for base score {0} (must be > 0)")]
    NonPositiveBase(f64),

    #[error("cannot aggregate an empty list of values")]
    EmptyAggregate,

    #[error("invalid run config: {0}")]
    RunConfig(String),

    #[error("reports disagree on metric definitions: {0}")]
    MetricDefinitionMismatch(String),

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
