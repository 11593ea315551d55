//! Matrices of words for synchronizing automata.
//!
//! A complete deterministic automaton acts on its states by total maps; the
//! matrix of a word `u` is the 0/1 matrix with a single unit per row, at
//! `(i, i.u)`. This crate computes exact reset words, the algebra of these
//! matrices over the rationals, the series `(S_q, u)`, the canonical L
//! matrices and the equation `M_u L_x = M_s`, and reproduces the published
//! extremal examples.

pub mod automaton;
pub mod exactla;
pub mod exec;
pub mod harness;
pub mod lmatrix;
pub mod report;
pub mod series;
pub mod wordmatrix;

pub use automaton::{Dfa, DfaError, StateSet, Word};
pub use exactla::{Basis, Rational, RationalMatrix};
pub use exec::Execution;
pub use lmatrix::{LError, LMatrix};
pub use series::SeriesContext;
pub use wordmatrix::{MatrixError, WordMatrix};
