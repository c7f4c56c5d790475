//! Exact syzygy-bundle cohomology and slope-stability certificates for
//! linear systems on `P^m x P^n`.

pub mod bigraded;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod linalg;
pub mod linsys;
pub mod moduli;
pub mod search;
pub mod stability;
pub mod syzygy;

pub use error::{Error, Result};
