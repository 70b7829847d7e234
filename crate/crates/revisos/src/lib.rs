//! A linear, reversible programming language with inductive types.
//!
//! The pipeline: parse `.iso` sources, check them under a linear type system
//! with exhaustive and non-overlapping pattern clauses, evaluate forward or
//! backward, compile Recursive Primitive Permutations into the language, and
//! extract circular proofs in multiplicative-additive linear logic with least
//! fixed points, with a validity checker and a cut-elimination engine that
//! mirrors evaluation.

// Error enums carry full terms and types for diagnostics; the hot paths
// return Ok overwhelmingly, so the large Err variants are deliberate.
#![allow(clippy::result_large_err)]

pub mod ast;
pub mod cli;
pub mod eval;
pub mod invert;
pub mod parser;
pub mod proofs;
pub mod rpp;
pub mod typecheck;
