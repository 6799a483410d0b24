//! Core algorithms for cross-lingual AMR parsing with first-order meta-learning.
//!
//! Everything in this crate is pure computation over owned values and only
//! needs `alloc`: PENMAN graph handling, graph linearization and repair, the
//! Smatch metric, a small reverse-mode autodiff tape, a recurrent
//! encoder-decoder, the first-order MAML and joint-learning trainers, the
//! k-shot evaluation protocol and a synthetic language-family generator.
//!
//! File formats, checkpoints, thread pools and the command-line driver live in
//! the `metamr` crate.
#![no_std]

extern crate alloc;

pub mod autodiff;
pub mod data;
pub mod eval;
pub mod exec;
pub mod fuzz;
pub mod linearize;
pub mod meta;
pub mod model;
pub mod penman;
pub mod smatch;

pub use autodiff::{Tape, Tensor, Var};
pub use linearize::{preprocess, restore, LinearizedAmr};
pub use penman::{parse_penman, serialize_penman, validate, AmrGraph};
pub use smatch::{compute_smatch, compute_smatch_exact, corpus_smatch, SmatchScore};
