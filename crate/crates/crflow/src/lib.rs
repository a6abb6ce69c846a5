//! Cross-resonance gate modeling on coupled anharmonic (transmon) qubits.
//!
//! The crate builds the driven two- and three-qubit Hamiltonians in the
//! transmon energy basis, block-diagonalizes them with a time-dependent
//! Schrieffer-Wolff expansion carried to fourth order in the exchange
//! coupling and drive amplitude, and extracts Pauli-basis gate parameters,
//! echo-sequence fidelities and frequency-collision reports. A numerical
//! time-domain propagator and a dense transmon diagonalizer serve as
//! independent oracles for the perturbative results.
//!
//! All frequencies are ordinary frequencies in MHz; times are in units of
//! 1/MHz (microseconds) so that `exp(-i H t)` never carries an explicit 2*pi.

pub mod transmon;
pub mod opalg;
pub mod model;
pub mod swpt;
pub mod gates;
pub mod echo;
pub mod collisions;
pub mod saturation;
pub mod cli;

pub use model::DeviceSpec;
pub use opalg::{AlgebraTol, FourierOperator, ResonancePole};
