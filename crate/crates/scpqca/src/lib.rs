//! File formats, reports, parallel drivers and the command line for
//! [`scpqca_core`].

pub mod cli;
pub mod experiment;
pub mod ingest;
pub mod parallel;
pub mod report;

pub use scpqca_core as core;
