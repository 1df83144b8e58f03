//! Collective-qubit gates between atomic ensembles coupled through cavities.
//!
//! Each node is an ensemble of `N` two-level atoms with a single shared
//! excitation playing the qubit. Dispersive coupling to cavity modes gives
//! effective exchange Hamiltonians on a five- or six-state collective basis,
//! from which iSWAP, sqrt-iSWAP and controlled-swap operations are built.
//!
//! Units: hbar = 1, all frequencies are angular.

pub mod analysis;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod model;
pub mod oracle;

pub type C64 = num_complex::Complex64;

pub use dynamics::{CollectiveState, EffectivePropagator, Trajectory};
pub use effective::{CollectiveBasis, EffectiveHamiltonian};
pub use error::{Error, Result};
pub use model::{CavityConfig, CouplingMode, Couplings, NodeConfig, QubitAmplitudes};
