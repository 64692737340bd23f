//! Java source frontend: lexer, recursive-descent parser and pretty printer
//! for the supported language subset.
//!
//! Supported: top-level and nested named classes with fields, methods and
//! constructors; blocks, local variables, `if`/`else`, `while`, `for`
//! (classic and enhanced), `return`, `break`, `continue`, `throw`,
//! `synchronized` blocks and `try`/`catch`/`finally`; expressions built from
//! literals, names, field accesses, method calls, `new`, array creation and
//! indexing, unary/binary/conditional operators, casts, `instanceof` and
//! assignments. Generic type arguments are kept as opaque text.
//!
//! Lambdas, method references, anonymous and local classes, `switch`,
//! `do`/`while`, labeled statements, interfaces, enums, records and
//! initializer blocks are rejected with a [`ParseError`].

pub mod ast;
pub mod lexer;
mod parser;
pub mod pretty;

use thiserror::Error;

pub use ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { line: pos.line, col: pos.col, offset: pos.offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("span {start}..{end} is outside the source ({len} bytes)")]
pub struct SpanOutOfRange {
    pub start: usize,
    pub end: usize,
    pub len: usize,
}

pub fn parse_compilation_unit(src: &SourceFile) -> Result<Ast, ParseError> {
    parser::Parser::new(src)?.parse_unit()
}

/// Classes (including nested ones) carrying an annotation whose simple name
/// is in `annotation_names`. Names in the list may be simple or qualified;
/// only their simple name is compared.
pub fn annotated_as_thread_safe<'a>(ast: &'a Ast, annotation_names: &[String]) -> Vec<&'a ClassDecl> {
    ast.all_classes()
        .into_iter()
        .filter(|c| has_annotation(c, annotation_names))
        .collect()
}

pub fn has_annotation(class: &ClassDecl, annotation_names: &[String]) -> bool {
    class.annotations().any(|a| {
        annotation_names
            .iter()
            .any(|n| n.rsplit('.').next().unwrap_or(n) == a.simple_name())
    })
}

/// Exact source text covered by `span`.
pub fn reconstruct_span(ast: &Ast, span: Span) -> Result<&str, SpanOutOfRange> {
    let src = &ast.file.content;
    let err = SpanOutOfRange { start: span.start.offset, end: span.end.offset, len: src.len() };
    if span.start.offset > span.end.offset {
        return Err(err);
    }
    src.get(span.start.offset..span.end.offset).ok_or(err)
}
