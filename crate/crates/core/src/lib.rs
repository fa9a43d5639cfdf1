//! Drinfeld-twist star products for the q-deformed su(2) and its quantum
//! spaces: the quantum plane, quantum Euclidean 4-space and quantum
//! Minkowski space, realized on commutative coordinate algebras order by
//! order in ħ (with q = e^ħ).

pub mod cgc;
pub mod error;
pub mod expr;
pub mod hseries;
pub mod matrix;
pub mod qplane;
pub mod reps;
pub mod spacetime4d;
pub mod twist;
pub mod verify;

pub use error::{Error, Result};
pub use hseries::{HSeries, HalfInt, DEFAULT_ORDER};
pub use matrix::SeriesMatrix;
