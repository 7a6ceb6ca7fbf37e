//! Source language front end: lexing, parsing, desugaring into the core AST,
//! and well-formedness checking.

pub mod ast;
pub mod check;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod surface;

pub use ast::{CmpOp, Expr, Formula, FunDef, Label, Program, Rhs, Term, Var};
pub use check::{check_program, rename, WellFormednessError};
pub use desugar::desugar;
pub use lexer::Pos;
pub use parser::parse;
pub use surface::SurfaceProgram;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at {pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: String) -> Self {
        ParseError { pos, message }
    }
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("desugaring failed: {0}")]
    Desugar(String),
    #[error(transparent)]
    WellFormedness(#[from] WellFormednessError),
}

/// Parse, desugar and check a source text in one go.
pub fn load(source: &str) -> Result<Program, FrontendError> {
    let sp = parse(source)?;
    let p = desugar(&sp).map_err(FrontendError::Desugar)?;
    Ok(check_program(&p)?)
}
