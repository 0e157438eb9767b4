//! Cavity acoustic field toolkit: classical standing-wave solutions of the
//! Maxwell-form field equations, their truncated Fock-space quantization,
//! lattice dynamics, and electron-phonon scattering and pairing kernels.

pub mod cavity;
pub mod cli;
pub mod duality;
pub mod error;
pub mod export;
pub mod field_kernel;
pub mod fock;
pub mod grid;
pub mod kinetics;
pub mod lattice;
pub mod pairing;
pub mod surd;
pub mod verify;

pub use error::{CavityError, ExportError, FieldError, FockError, KineticsError, LatticeError, PairingError};
pub use grid::{GridSpec, VectorField, VectorFieldPair};
