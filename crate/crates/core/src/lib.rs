//! Exact-arithmetic machinery for explicit height and degree bounds on
//! subvarieties of powers of elliptic curves.
//!
//! The crate provides:
//!
//! - exact group-law arithmetic on Weierstrass curves over the rationals
//!   ([`curve`]),
//! - the division-polynomial system with its degree laws ([`divpoly`]),
//! - Weil, euclidean and certified Néron-Tate heights ([`heights`]),
//! - an exact integer-lattice toolkit with enumeration-backed successive
//!   minima, orthogonal lattices and geometry-of-numbers certificates
//!   ([`lattice`]),
//! - every explicit constant of the bound machinery, Chow-ring degree
//!   computations and the auditable bound assembly ([`bounds`]),
//! - the family of curves `x1^n = y2` inside `E^2` for
//!   `E: y^2 = x^3 + x - 1`, with degree/genus data, explicit bounds and a
//!   rational-point search ([`cn`]).
//!
//! Every runnable capability has a matching program under `examples/`; a thin
//! `ellbounds` binary exposes the same operations as subcommands (see
//! [`cli`]).

pub mod bounds;
pub mod cli;
pub mod cn;
pub mod curve;
pub mod divpoly;
pub mod heights;
pub mod lattice;

mod error;
mod numeric;

pub use error::Error;
pub use numeric::PiRat;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
