//! Spectral machinery for discrete periodic Schrödinger operators `Δ + V` on
//! `ℤ^d` with pairwise coprime periods.

pub mod error;
pub mod floquet;
pub mod harness;
pub mod isospectral;
pub mod laurent;
pub mod lattice;
pub mod linalg;
pub mod potential;
pub mod rng;
pub mod separability;

pub use error::{Error, Result};
pub use lattice::{BlockPartition, PeriodLattice};
pub use num_complex::Complex64;
pub use potential::{FourierTable, Kind, Potential, Transform};
pub use separability::Pattern;
