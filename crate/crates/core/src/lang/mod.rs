//! The `.ppg` language: syntax tree, parser, printer, and flowgraph lowering.

pub mod ast;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod print;
pub mod program;

pub use ast::{BinOp, CmpOp, Cond, Expr, Prob, SourceProgram, Stmt};
pub use lower::lower;
pub use parser::parse;
pub use print::print;
pub use program::{Command, Edge, LocId, Program, ProgramError, Slot, SlotId, SlotKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{line}:{col}: lexical error: {message}")]
    Lex { line: usize, col: usize, message: String },
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
}

/// Parses and lowers in one step.
pub fn compile(text: &str) -> Result<Program, LangError> {
    Ok(lower(&parse(text)?))
}
