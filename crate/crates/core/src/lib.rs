//! Quantum walk kernels.
//!
//! Discrete-time coined walks and continuous-time walks on lines, lattices,
//! arbitrary graphs and percolated substrates, with decoherence channels,
//! stochastic unravellings, multiple interacting walkers, and the
//! measurement statistics and resource estimators that go with them.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, experiment
//! configuration and the command-line runner live in the `qwalk` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod coined;
pub mod continuous;
pub mod decoherence;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod multiwalker;
pub mod seed;
pub mod substrate;

pub use num_complex::Complex64;

pub use analysis::{Distribution, PositionLaw, SampleSet};
pub use coined::{CoinOperator, InitialCoinSpec, WalkState};
pub use continuous::{ContinuousState, Hamiltonian};
pub use decoherence::{DensityState, NoiseKind, NoiseModel};
pub use ensemble::{EnsembleJob, EnsembleSummary};
pub use error::{Result, WalkError};
pub use multiwalker::{InteractionSpec, MultiWalkerState, Statistics, WalkKind};

pub use substrate::{Boundary, PercolationMode, PercolationSpec, Substrate, VertexLabels};
