//! Fair allocation of indivisible goods and chores when every agent ranks
//! items by importance and compares bundles lexicographically.
//!
//! The crate covers the preference model, fairness and efficiency checkers,
//! the constructive algorithms, exhaustive search oracles for desk-scale
//! instances, and gadget instances for the hardness reductions.

pub mod algorithms;
pub mod checkers;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod generate;
pub mod model;
pub mod oracle;
pub mod reductions;
pub mod verify;

pub use checkers::{Property, PropertyReport, Violation};
pub use error::{Error, Result};
pub use model::{
    lex_prefers, rank_of, rank_within, run_picking_sequence, Allocation, Bundle, ImportanceOrdering, Instance, ItemId,
    PickingSequence, Polarity, Preference, Signature, MAX_ITEMS,
};
pub use oracle::SearchBudget;
