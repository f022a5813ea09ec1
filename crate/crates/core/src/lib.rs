//! Minimal factorizations of the full cycle into transpositions, their tree
//! encodings, relabelling walks, duality, and local limits.

pub mod bijections;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod labelling;
pub mod random;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
pub use factorization::{Alphabet, Factorization, Transposition};
