//! Numerical toolkit for non-local, non-homogeneous phase transitions.
//!
//! The library is organized around the objects of the sharp-interface limit
//! of non-local Allen-Cahn energies with space-dependent double wells:
//!
//! * [`kernel`] — even interaction kernels on R^m, their rescalings,
//!   directional reductions, truncations and tail integrals, with exact
//!   handling of power-law singularities at the origin.
//! * [`potential`] — double-well potentials `W(x, t)` with Hölder moving
//!   wells, structural validation, transition maps and slab restrictions.
//! * [`profile`] — 1D optimal transition profiles: energies, solvers,
//!   generalized inverses, the conjugate functional, the `H` operator and
//!   the optimality certificate, plus surface tensions and Hölder scans.
//! * [`field`] — multi-dimensional energies on rectangles, polyhedral
//!   interfaces, the limit functional, locality defect, eps-traces and
//!   recovery-field construction for sharp-interface sweeps.
//! * [`oracle`] — independent brute-force and quadrature references used
//!   by the test suite.

pub mod error;
pub mod field;
pub mod kernel;
pub mod num;
pub mod oracle;
pub mod potential;
pub mod profile;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
