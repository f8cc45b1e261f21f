//! Almost-sure termination of probabilistic programs via coin-toss patterns.
//!
//! A program is lowered to a flowgraph, instantiated as an explicit MDP, and a
//! pattern (a set of infinite coin sequences of probability one) is searched
//! for such that every run conforming to it terminates.

pub mod lang;
pub mod semantics;
pub mod words;
pub mod oracle;
pub mod automaton;
pub mod checker;
pub mod patterns;
pub mod responses;
pub mod instrument;
