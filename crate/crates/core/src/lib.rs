//! Continuous-time quantum walks on disordered rings and their discrete
//! Wigner functions.
//!
//! The pipeline is: build a ring Hamiltonian ([`model`]), eigendecompose it
//! and propagate a localized state ([`spectral`]), map the state to phase
//! space ([`wigner`]), and average over disorder realizations ([`ensemble`]).
//! [`io`] and [`cli`] handle files and the command line.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod model;
pub mod spectral;
pub mod wigner;

pub use ensemble::{
    ensemble_longtime, ensemble_snapshot, verify_interchange, EnsembleResult, EnsembleRunner,
    EnsembleSpec, InterchangeReport,
};
pub use error::{Error, Result};
pub use model::{
    build_h0, build_hamiltonian, sample_disorder, DisorderKind, DisorderRealization,
    HamiltonianMatrix, RingSize,
};
pub use spectral::{eigendecompose, propagate, transition_probability, AmplitudeVector, EigenSystem};
pub use wigner::{
    finite_time_average, marginal_momentum, marginal_position, wigner_bloch, wigner_longtime,
    wigner_snapshot, GridMeta, PhaseSpaceGrid, TimeLabel,
};
