//! Local Hardy spaces of differential forms, computed on finite metric
//! measure spaces and weighted simplicial complexes.
//!
//! The continuous objects are replaced by a fixed discrete model: a finite
//! space with point masses, a geometric grid on the time interval (0,1], and
//! declared quadratures for every integral. See the README for a tour.

pub mod atoms;
pub mod complex;
pub mod corpus;
pub mod covering;
mod error;
pub mod hardy;
pub mod holo;
pub mod offdiag;
pub mod quad;
pub mod space;
pub mod tent;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
