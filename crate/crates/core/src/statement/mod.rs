//! Lean-subset statement files: parsing, printing, canonical duplicate keys and
//! prover-output classification.
//!
//! The grammar covers the logical skeleton of a theorem type (quantifiers,
//! arrows, connectives, relations, applications). Anything else is kept as an
//! opaque token span that prints back as written.

mod ast;
mod canon;
mod classify;
mod lexer;
mod parse;
mod print;

pub use ast::{Binder, BinderKind, Conn, DeclKeyword, Expr, OpaqueTok, Quant, Rel, StatementFile};
pub use canon::{alpha_normalize, canonical_text, canonicalize, CanonicalKey};
pub use classify::{classify_proof_output, ProofClassification};
pub use lexer::{tokenize, TokKind, Token};
pub use parse::{parse_expression, parse_file};
pub use print::{print_binder, print_declaration, print_expr, print_file, print_file_with, SymbolStyle};

pub(crate) use canon::collapse_ws;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty statement file")]
    Empty,
    #[error("parse error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("expected exactly one theorem declaration, found {count}")]
    MultipleDeclarations { count: usize },
    #[error("no theorem or lemma declaration found")]
    NoDeclaration,
}

impl ParseError {
    pub(crate) fn at(position: usize, expected: &str) -> ParseError {
        ParseError::Syntax { position, expected: expected.to_string() }
    }
}
