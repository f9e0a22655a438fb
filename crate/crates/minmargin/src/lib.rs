//! Batch active sampling with bootstrap ensembles.
//!
//! The library selects which unlabeled candidates to send for labeling when
//! labels are bought in batches. Its core strategy scores each candidate by
//! the *minimum* classification margin over an ensemble of models trained on
//! stratified bootstrap resamples of the labeled pool, then queries the B
//! lowest — combining uncertainty with the diversity that plain margin
//! sampling loses at large batch sizes. Alongside it live the classic
//! baselines (margin, random, vote entropy committees, softmax variance,
//! coreset-style k-centers, and mixtures), a two-Gaussian simulation, a
//! benchmark harness with repeated splits and hyperparameter sweeps, and a
//! Monte-Carlo verifier for the half-sphere analysis that explains *why*
//! min-margin spreads its batch.

pub mod cli;
pub mod config;
pub mod data;
mod error;
pub mod halfsphere;
pub mod harness;
pub mod learners;
pub mod sampling;
pub mod seeding;
pub mod simulation;
mod stats;

pub use error::{Error, Result};
