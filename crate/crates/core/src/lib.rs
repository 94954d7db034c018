//! Spectra of operators on separable Hilbert spaces from finitely many
//! matrix elements.
//!
//! The algorithms scan a complex grid and keep the points where the smallest
//! singular value of a shifted truncation is small:
//!
//! - [`scicore::gamma1`] for bounded selfadjoint operators,
//! - [`scicore::gamma2`] and [`scicore::xi_n`] for relatively compact
//!   perturbations `T + V`,
//! - [`schrodinger::gamma3`] for `-Δ + V` with a compactly supported C¹
//!   potential, whose matrix elements are themselves approximated from point
//!   samples of `V`.
//!
//! [`oracle`] holds independent brute-force references, [`setdist`] the set
//! metrics used to measure convergence, and [`experiment`] the configurable
//! driver that writes point files.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod schrodinger;
pub mod scicore;
pub mod setdist;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use scicore::{Algorithm, SpectralSet};
