//! Petz recovery of thermal spin-chain states from their marginals.
//!
//! The crate builds Gibbs states of a mixed-field Ising chain, recovers them
//! from the `AB` and `BC` marginals with the rotated Petz map, and measures
//! the reconstruction against conditional mutual information. Supporting
//! modules cover the random band matrix expansion, parity-sector level
//! statistics and executable checks of the recovery-closeness lemmas.

pub mod bounds;
pub mod error;
pub mod hilbert;
pub mod linops;
pub mod petz;
pub mod random;
pub mod rbm;
pub mod spectral;
pub mod spinchain;
pub mod thermal;

pub use error::{Error, Result};
pub use hilbert::{partial_trace, DensityMatrix, Partition};
pub use linops::{root_fidelity, CMatrix, HermitianMatrix, NormKind, C64};
pub use petz::{petz_recover, recovery_report, RecoveryReport};
pub use spinchain::{build_hamiltonian, ChainParams};
pub use thermal::{cmi, gibbs_state, ThermalFamily};
