//! Restricted second-order logic over finite ordered structures: formulas,
//! evaluation, arithmetic macros, random-access Turing machines and the
//! compilation of nondeterministic machines into existential sentences.

pub mod cli;
pub mod eval;
pub mod faginc;
pub mod formula;
pub mod macros;
pub mod ratm;
pub mod structure;
