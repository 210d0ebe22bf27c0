//! An exact-arithmetic simulator of post-selected linear-optics quantum
//! teleportation with photon-pair sources, finite-efficiency detectors and
//! detector cascades.
//!
//! States are sparse multimode Fock vectors with coefficients in `Q(√2)`
//! (or `f64` in float mode); the full measurement pipeline — pair sources,
//! beam splitters, polarization rotation, detector POVMs, partial traces —
//! is closed over that ring, so every fidelity and coefficient ratio comes
//! out as an exact rational expression.

pub mod density;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod optics;
pub mod pdc;
pub mod scalar;
pub mod verify;

pub use density::{DensityOperator, Normalization};
pub use error::Error;
pub use fock::{modes, BasisKet, Convention, Ket, ModeId};
pub use scalar::{ExactScalar, Scalar};
