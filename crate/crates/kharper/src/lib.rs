//! Kicked Harper quantum map on a state-vector simulator.
//!
//! The library provides three ways to realize one period of the map as a
//! quantum circuit (exact diagonal kicks, the slice approximation, and a
//! Chebyshev polynomial approximation), a static-imperfection noise
//! model acting between gates, transport and phase-space observables,
//! and eigenphase extraction for spectral statistics.

// Pulls in the BLAS/LAPACK link directives; without this the linker
// never sees the backend.
#[cfg(feature = "lapack")]
extern crate netlib_src as _netlib_src;

pub mod chebyshev;
pub mod classical;
pub mod error;
pub mod harper;
pub mod noise;
pub mod observables;
pub mod slices;
pub mod spectrum;
pub mod state;

pub use error::{Error, Result};
pub use state::{
    apply_gate, apply_qft, apply_qft_fast, apply_sequence, qft_sequence, Gate, GateSequence,
    QuantumState,
};
