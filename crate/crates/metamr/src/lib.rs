//! File formats, checkpoints, reports and a thread-pool executor around
//! [`metamr_core`].
//!
//! The `metamr` binary in this crate drives the whole pipeline from the
//! command line; these modules are what it reads and writes.

pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod exec;
pub mod report;
pub mod synthetic;
pub mod tsv;

pub use exec::Rayon;
