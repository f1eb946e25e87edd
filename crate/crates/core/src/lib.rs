//! Progress-measure based model checking for fixed-point modal logics.

pub mod checker;
pub mod coalgebra;
pub mod eqsys;
pub mod error;
pub mod gen;
pub mod lattice;
pub mod lintime;
pub mod logic;
pub mod parity;
pub mod priord;

pub use error::{Error, Result};
