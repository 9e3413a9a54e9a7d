//! Measurement subsetting for noisy quantum readout.
//!
//! A program is run twice over: once measuring every qubit (the global
//! histogram) and once as a set of small circuits that each measure only a
//! few qubits (the marginals). Small measurements suffer less readout error,
//! and [`reconstruction`] folds those high-fidelity marginals back into the
//! global histogram without losing its correlations.
//!
//! [`noise_sim`] provides a synthetic readout channel so the whole pipeline
//! can run without hardware.

pub mod complexity;
pub mod error;
pub mod io;
pub mod metrics;
pub mod noise_sim;
pub mod pipeline;
pub mod pmf;
pub mod reconstruction;
pub mod subsetting;

pub use error::{Error, Result};
pub use pmf::{hellinger, Counts, Marginal, Outcome, SparsePmf};
pub use reconstruction::{
    bayesian_reconstruction, bayesian_update, reconstruct_multilayer, LayerSet, Reconstruction,
    ReconstructionConfig, UpdateWeighting,
};
