//! Composite biunitary connections, generalized Yang-Baxter state sums on
//! lattices, string-algebra commuting squares and the fusion invariants of
//! multiple inclusions, at finite size.

pub mod composite;
pub mod connection;
pub mod error;
pub mod fusion;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod state_sum;
pub mod string_algebra;

pub use error::{Error, Result};
