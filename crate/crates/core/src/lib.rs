//! Channel ranking and selection for trial-structured multichannel recordings.
//!
//! Two ways of applying a feature ranker to a dataset of trials:
//!
//! * **horizontal**: pair trial *i* of every class into one labeled matrix,
//!   rank each pair separately, then fuse the per-trial rankings by taking the
//!   most frequent channel at every rank position and dropping repeats;
//! * **vertical**: stack every trial into a single matrix and rank once.
//!
//! Rankers ([`rankers`]) are Relief, mRMR and Laplacian Score. The fused or
//! single ranking is evaluated by a top-n prefix sweep with one of the
//! built-in classifiers ([`classifiers`]), and summarized by accuracy, the
//! selected channel count, and their ratio ρ ([`evaluation`]).

pub mod error;
pub mod data;
pub mod rankers;
pub mod aggregation;
pub mod classifiers;
pub mod evaluation;
pub mod cli;
pub mod rng;

pub use error::{Error, Result};
