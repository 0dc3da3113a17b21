use std::fmt;

use crate::term::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const LEX: &str = "E-LEX";
    pub const SYNTAX: &str = "E-SYNTAX";
    pub const DUP_PROC: &str = "E-DUP-PROC";
    pub const DUP_COMPONENT: &str = "E-DUP-COMP";
    pub const DUP_EXTERN: &str = "E-DUP-EXTERN";
    pub const DUP_PROPERTY: &str = "E-DUP-PROP";
    pub const DUP_BINDER: &str = "E-DUP-BINDER";
    pub const UNDEF_PROC: &str = "E-UNDEF-PROC";
    pub const UNDEF_EXTERN: &str = "E-UNDEF-EXTERN";
    pub const UNBOUND: &str = "E-UNBOUND";
    pub const INTERFACE: &str = "E-INTERFACE";
    pub const UNGUARDED: &str = "E-UNGUARDED";
    pub const ARITY: &str = "E-ARITY";
    pub const EMPTY_DOMAIN: &str = "E-EMPTY-DOMAIN";
    pub const DRAW_IN_PRED: &str = "E-DRAW-IN-PRED";
    pub const ATTR_INIT: &str = "E-ATTR-INIT";
    pub const PROP_COMPONENT: &str = "E-PROP-COMP";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity[code]: message`, optionally with ANSI colour
    /// on the severity.
    pub fn render(&self, file: &str, color: bool) -> String {
        let sev = if color {
            let code = match self.severity {
                Severity::Error => "31",
                Severity::Warning => "33",
            };
            format!("\x1b[1;{code}m{}\x1b[0m", self.severity)
        } else {
            self.severity.to_string()
        };
        format!(
            "{file}:{}:{}: {sev}[{}]: {}",
            self.span.line, self.span.col, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("<input>", false))
    }
}
