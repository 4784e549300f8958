//! Slot filling as question answering: dataset construction and scoring.
//!
//! The crate converts SQuAD and UWRE relation-extraction data into one
//! canonical instance format, derives negative, dummy-token and challenge
//! variants, mixes datasets at fixed sizes, and scores prediction files with
//! slot-filling precision/recall/F1 and challenge accuracy.

pub mod baseline;
pub mod challenge;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod mixer;
pub mod model;
pub mod provenance;
pub mod sampling;
pub mod segment;
pub mod templates;
pub mod text;
pub mod transforms;

pub use error::{Error, Result};
pub use model::{
    validate_dataset, Dataset, Instance, Origin, Prediction, QuestionTemplate, RelationQuery, Span, Split,
};
