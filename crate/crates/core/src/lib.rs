//! Finite-dimensional toolkit for entanglement breaking quantum channels.
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, joint
//!   diagonalization, partial traces.
//! - [`channel`]: Kraus, measure-and-prepare and weighted Choi representations.
//! - [`seb`]: commutative-range test and the certified measure-and-prepare
//!   decomposition of channels with commutative range.
//! - [`nullspace`]: synthesis of a channel with a prescribed null space.
//! - [`dilation`]: dilation to the predual of a map with commutative range.
//! - [`structure`]: fixed points and multiplicative domain of rank-one Kraus channels.
//! - [`io`] and [`cli`]: JSON file formats, canonical reports, command dispatch.

pub mod channel;
pub mod cli;
pub mod dilation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod nullspace;
pub mod random;
pub mod seb;
pub mod structure;

pub use channel::{Channel, HolevoChannel, HolevoPair, KrausChannel, WeightedChoi};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances, C64};
