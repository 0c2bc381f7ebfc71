//! The surface language: a small class-based calculus with explicit `let`,
//! variable-only data flow, and labeled allocation sites.
//!
//! ```text
//! program  = { class } ;
//! class    = "class" IDENT [ "extends" IDENT ] "{" { member } "}" ;
//! member   = IDENT IDENT ";"                                  (* field *)
//!          | IDENT IDENT "(" [ params ] ")" "{" expr "}" ;    (* method *)
//! params   = IDENT IDENT { "," IDENT IDENT } ;
//! expr     = "let" IDENT "=" expr "in" expr
//!          | simple [ ";" expr ] ;
//! simple   = "if" "(" IDENT "==" IDENT ")" "{" expr "}" "else" "{" expr "}"
//!          | "null"
//!          | "new" "[" IDENT "]" IDENT "(" ")"
//!          | "(" IDENT ")" simple                             (* cast *)
//!          | "(" expr ")"
//!          | IDENT [ "." IDENT [ "(" [ args ] ")" | ":=" IDENT ] ] ;
//! args     = IDENT { "," IDENT } ;
//! ```
//!
//! `//` comments run to end of line. `e1; e2` is sugar for a let with a
//! throwaway binder. The same grammar ships machine-readably in
//! `docs/grammar.ebnf`.

mod ast;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

pub use ast::{ClassDecl, Expr, MethodDecl, Program};
pub use pretty::pretty_print;

/// A parse-time problem, positioned at a 1-based line and column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic { line, col, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Parses and resolves a source text. On success every receiver carries its
/// static class, binders within each method body are pairwise distinct, and
/// allocation labels are registered and globally unique. On failure, at
/// least one positioned diagnostic.
pub fn parse_program(source: &str) -> Result<Program, Vec<Diagnostic>> {
    parser::parse_source(source)
}
