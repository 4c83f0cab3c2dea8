//! Numerical laboratory for quantum energy teleportation (QET) on a four-site
//! spin model with edge fields, and its Majorana-fermion representation.
//!
//! The crate is organized bottom-up:
//!
//! - [`operator`]: dense complex operators on the 16-dimensional spin space.
//! - [`model`]: Hamiltonian, symmetry operators and the even-parity ground state.
//! - [`protocol`]: Alice's projective measurement, Bob's conditioned feedback
//!   and the resulting energy ledger.
//! - [`optimum`]: closed-form optimal protocol parameters and a brute-force
//!   grid oracle over the direct matrix-element objective.
//! - [`majorana`]: Jordan-Wigner / Majorana operators on four sites.
//! - [`chain`]: quadratic Majorana chains of arbitrary length.
//! - [`thermo`]: reduced states, entropies and the second-law bound.
//! - [`verify`]: the invariant suite behind `qet verify`.
//!
//! Energies are in the same units as the couplings; the usual choice is `k = 1`.

pub mod chain;
pub mod error;
pub mod exec;
pub mod majorana;
pub mod model;
pub mod operator;
pub mod optimum;
pub mod protocol;
pub mod table;
pub mod thermo;
pub mod verify;

pub use error::{QetError, Result};
pub use exec::Exec;
pub use model::{GroundStateSolution, ModelParams};
pub use operator::DenseOperator;
pub use protocol::{EnergyLedger, ProtocolParams};
