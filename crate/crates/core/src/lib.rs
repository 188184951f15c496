//! Dirac operators in the plane with a mass term switched on outside a
//! domain Ω, and the infinite-mass limit on Ω.
//!
//! The crate is organised bottom-up:
//!
//! * [`spinor`] — grids, ℂ²-valued fields, Pauli and boundary-matrix algebra;
//! * [`geometry`] — domains, boundary meshes, tubular-coordinate checks;
//! * [`operators`] — the pseudospectral Hamiltonian, the radial disk model,
//!   Bessel functions and symmetry reduction;
//! * [`spectra`] — dense and windowed eigensolvers, the disk oracle, Riesz
//!   projections and rate fitting;
//! * [`resolvents`] — shifted solves, operator-norm estimation and the
//!   resolvent studies;
//! * [`identities`] — quadrature checks of the boundary identities;
//! * [`study`] — configuration, orchestration and report emission used by
//!   the `study` binary.

pub mod error;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod operators;
pub(crate) mod parallel;
pub mod resolvents;
pub mod spectra;
pub mod spinor;
pub mod study;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

#[cfg(feature = "lapack")]
extern crate openblas_src;
