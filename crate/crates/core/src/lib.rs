//! Quantum finite automata, quantum pushdown automata and quantum
//! context-free grammars, with the conversions between them.
//!
//! Words are sequences of [`Symbol`]s. A quantum language is a function from
//! words to probabilities in `[0, 1]`; every model here computes one.

pub mod algebra;
pub mod catalog;
pub mod error;
pub mod format;
pub mod grammar;
pub mod qfa;
pub mod qpda;
pub mod random;
pub mod series;
pub mod stochastic;
pub mod word;

pub use algebra::{Complex, ComplexMatrix, ComplexVector, OrthonormalBasis};
pub use error::{Error, Result};
pub use grammar::QuantumGrammar;
pub use qfa::{Dfa, Qfa};
pub use qpda::Qpda;
pub use word::{Symbol, Word};
