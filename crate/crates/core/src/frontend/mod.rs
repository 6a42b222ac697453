//! Surface language: lexing, parsing, validation and pretty-printing.
//!
//! ```text
//! method copyEven(a: Int[]) {
//!   var j, v: Int := 0
//!   while (j < length(a)) invariant 0 <= j && j <= length(a) {
//!     if (j % 2 == 0) { v := a[j] } else { a[j] := v }
//!     j := j + 1
//!   }
//! }
//! ```

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{Method, Param, Program, SourceSpan, Stmt, StmtKind, Type, WhileLoop};
pub use parser::{parse_bool_expr, parse_int_expr, parse_perm_expr, parse_program, parse_program_file};

use crate::expr::BoolExpr;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{span}: lexical error: {message}")]
    Lex { span: SourceSpan, message: String },
    #[error("{span}: parse error: {message}")]
    Parse { span: SourceSpan, message: String },
    #[error("{span}: type error: {message}")]
    Type { span: SourceSpan, message: String },
    #[error("{span}: unknown variable `{name}`")]
    Unknown { span: SourceSpan, name: String },
    #[error("{span}: negative permission literal in {stmt}")]
    NegativePermission { span: SourceSpan, stmt: &'static str },
}

impl FrontendError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            FrontendError::Lex { span, .. }
            | FrontendError::Parse { span, .. }
            | FrontendError::Type { span, .. }
            | FrontendError::Unknown { span, .. }
            | FrontendError::NegativePermission { span, .. } => span,
        }
    }
}

/// The `invariant` and `underinvariant` annotations of a loop.
pub fn parse_invariant_annotations(w: &WhileLoop) -> (Vec<BoolExpr>, Vec<BoolExpr>) {
    (w.over_inv.clone(), w.under_inv.clone())
}
