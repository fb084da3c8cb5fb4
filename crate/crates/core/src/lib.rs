//! A workbench for the untyped call-by-value λ-calculus with shift and reset.

pub mod axioms;
pub mod bisim;
pub mod cps;
pub mod error;
pub mod lts;
pub mod reduction;
pub mod syntax;
pub mod testgen;

pub use error::{Error, Result};
pub use syntax::{parse, parse_with, print, Abbreviations, Term, Var};
