#![cfg_attr(not(test), no_std)]

//! Configurational comparative analysis by set covering.
//!
//! The pipeline has three stages, each in its own module:
//!
//! 1. [`necessity`]: literals present in (almost) every positive case are
//!    flagged as necessary and removed from the sufficiency search.
//! 2. [`candidates`]: every conjunction over the remaining factors that passes
//!    a sufficiency-consistency threshold and a frequency cutoff becomes a
//!    candidate rule.
//! 3. [`cover`]: a greedy maximum-coverage pass picks candidate rules, each of
//!    which must contribute at least `unique_cover` new positive cases.
//!
//! [`pipeline`] wires the stages together, [`pathways`] generates planted
//! synthetic datasets and [`robustness`] runs parameter sweeps and case
//! resampling.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, threads and the
//! command line live in the `scpqca` companion crate.

extern crate alloc;

pub mod bitset;
pub mod candidates;
pub mod cover;
mod error;
pub mod model;
pub mod necessity;
pub mod pathways;
pub mod pipeline;
pub mod rng;
pub mod robustness;

pub use bitset::CaseSet;
pub use error::{Error, Result};
pub use model::{CandidateRule, Case, CaseTable, Conjunction, Factor, FactorSchema, Level, Literal, Ratio, Solution};
