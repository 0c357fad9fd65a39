//! Two-flavor neutrino propagation in matter, simulated on an emulated
//! one- or two-qubit device.
//!
//! The crate is split along the path a scan takes:
//!
//! - [`physics`]: analytic oscillation probabilities (constant density,
//!   slab products, adiabatic MSW) used as ground truth.
//! - [`circuits`]: builders turning a physics scenario into a [`CircuitIR`].
//! - [`compile`]: the virtual-Z phase-folding pass and lowering to the
//!   `{RZ, SX, X}` native set.
//! - [`qsim`]: dense statevector execution and seeded shot sampling.
//! - [`optim`]: overlap-fidelity fitting of the two-CNOT ansatz.
//! - [`scan`]: energy scans, CSV and SVG output.

pub mod circuits;
pub mod compile;
mod error;
pub mod optim;
pub mod physics;
pub mod qsim;
pub mod rng;
pub mod scan;

pub use error::{Error, Result};
pub use qsim::{CircuitIR, GateOp, StateVector};
