//! Decision procedures for Thurston maps with extra marked points.
//!
//! Two backends share one vocabulary of bisets, symbolic orbits and portraits:
//!
//! - `Tor`: maps doubly covered by a torus endomorphism, modelled on the
//!   crossed product `Z^2 x| {+1,-1}` and its injective endomorphisms `M^v`
//!   ([`tor`], [`sl2`], [`shadow`]).
//! - `Exp`: contracting bisets over free groups given by wreath recursions
//!   ([`wreath`], [`nucleus`], [`orbits`], [`portrait`]).
//!
//! [`reduce`] combines a minimal-biset oracle with portrait conjugacy to decide
//! conjugacy of bisets with extra marked points, and [`io`] holds the JSON
//! document formats used by the command-line tool.

pub mod affine;
pub mod cyclic;
pub mod error;
pub mod index;
pub mod io;
pub mod nucleus;
pub mod orbits;
pub mod portrait;
pub mod rational;
pub mod reduce;
pub mod shadow;
pub mod sl2;
pub mod tor;
pub mod words;
pub mod wreath;

pub use error::{Error, Result};

/// Integer type used for matrices, translation vectors and affine data.
pub type Int = i128;
