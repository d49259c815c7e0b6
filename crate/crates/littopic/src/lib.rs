//! Multi-label topic classification for biomedical literature.
//!
//! A from-scratch pipeline for tagging article records (title + abstract)
//! with any subset of seven topics: WordPiece tokenization, a compact
//! BERT-style encoder with a full analytic backward pass, per-topic binary
//! fine-tuning, masked language-model pretraining, and a multi-label F1
//! evaluation suite (micro, macro, instance-based and weighted averages)
//! with seed-repeat and ranking arithmetic for reporting.
//!
//! The `littopic` binary exposes the pipeline as subcommands
//! (`ingest`, `pretrain-mlm`, `finetune`, `predict`, `evaluate`, `report`,
//! `run-seeds`); the narrative guide under `book/` walks through every
//! stage. All randomness flows from explicit seeds: identical configuration
//! and inputs reproduce checkpoints, predictions and reports byte for byte.

pub mod corpus;
pub mod error;
pub mod tensor;
pub mod tokenizer;

pub use error::{Error, Result};
