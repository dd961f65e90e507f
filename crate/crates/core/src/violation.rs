use std::fmt;

use crate::ident::Ident;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

/// A broken well-formedness rule, reported as data rather than as a failure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub severity: Severity,
    /// Stable rule identifier, e.g. `transfer-cross-group`.
    pub rule: &'static str,
    pub subjects: Vec<Ident>,
    pub message: String,
}

impl Violation {
    pub fn error(rule: &'static str, subjects: Vec<Ident>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Error,
            rule,
            subjects,
            message: message.into(),
        }
    }

    pub fn warning(rule: &'static str, subjects: Vec<Ident>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Warning,
            rule,
            subjects,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}[{}]", self.rule)?;
        if !self.subjects.is_empty() {
            let names: Vec<&str> = self.subjects.iter().map(Ident::as_str).collect();
            write!(f, " ({})", names.join(", "))?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Returns only the error-level entries.
pub fn errors(violations: &[Violation]) -> impl Iterator<Item = &Violation> {
    violations.iter().filter(|v| v.is_error())
}
