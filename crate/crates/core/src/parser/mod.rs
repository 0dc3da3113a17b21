//! Concrete syntax: lexing, parsing, name resolution, validation and
//! pretty-printing of system specifications.

pub mod diag;
pub mod lexer;
#[allow(clippy::module_inception)]
pub mod parser;
pub mod printer;
pub mod validate;

pub use diag::{codes, Diagnostic, Severity};
pub use parser::parse_syntax;
pub use printer::{pretty_print, property_to_string};
pub use validate::{resolve, validate};

use crate::model::SystemSpec;

/// Parses, resolves and validates a specification. Returns every error
/// diagnostic found, sorted by position.
pub fn parse_spec(src: &str) -> Result<SystemSpec, Vec<Diagnostic>> {
    let mut spec = parse_syntax(src).map_err(|d| vec![d])?;
    resolve(&mut spec);
    let diags: Vec<Diagnostic> = validate(&spec).into_iter().filter(Diagnostic::is_error).collect();
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(diags)
    }
}
