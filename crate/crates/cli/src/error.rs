use std::fmt;

use serde::Serialize;

/// Exit code 1.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit code 2.
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Validation,
    Io,
}

/// Printed to stderr as one JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl CliError {
    pub fn validation(message: impl fmt::Display) -> Self {
        Self { kind: Kind::Validation, message: message.to_string(), field: None, details: None }
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self { kind: Kind::Io, message: message.to_string(), field: None, details: None }
    }

    pub fn field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Validation => EXIT_VALIDATION,
            Kind::Io => EXIT_IO,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"kind\":\"io\",\"message\":{:?}}}", self.message))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

impl From<seacat_core::catalog::StoreError> for CliError {
    fn from(e: seacat_core::catalog::StoreError) -> Self {
        Self::io(e)
    }
}

impl From<seacat_core::catalog::CatalogError> for CliError {
    fn from(e: seacat_core::catalog::CatalogError) -> Self {
        match e {
            seacat_core::catalog::CatalogError::Store(s) => s.into(),
            other => Self::validation(other),
        }
    }
}

impl From<seacat_core::ingest::IngestError> for CliError {
    fn from(e: seacat_core::ingest::IngestError) -> Self {
        match e {
            seacat_core::ingest::IngestError::Catalog(c) => c.into(),
            other => Self::validation(other),
        }
    }
}

impl From<seacat_core::taxonomy::TaxonomyError> for CliError {
    fn from(e: seacat_core::taxonomy::TaxonomyError) -> Self {
        use seacat_core::taxonomy::TaxonomyError::*;
        match e {
            Io { .. } | Provider(_) => Self::io(e),
            other => Self::validation(other),
        }
    }
}

impl From<seacat_core::stats::StatsError> for CliError {
    fn from(e: seacat_core::stats::StatsError) -> Self {
        match e {
            seacat_core::stats::StatsError::Taxonomy(t) => t.into(),
            other => Self::validation(other),
        }
    }
}

impl From<seacat_core::evaluation::EvalError> for CliError {
    fn from(e: seacat_core::evaluation::EvalError) -> Self {
        Self::validation(e)
    }
}

impl From<seacat_core::costmodel::CostError> for CliError {
    fn from(e: seacat_core::costmodel::CostError) -> Self {
        Self::validation(e)
    }
}
