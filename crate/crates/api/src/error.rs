use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use seacat_core::catalog::CatalogError;
use seacat_core::ingest::{IngestError, RowError};
use seacat_core::stats::StatsError;
use seacat_core::taxonomy::TaxonomyError;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<u64>,
}

/// JSON error body: `{"error": code, "message": ..., "fields": [...]}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        Self { status, error, message: message.into(), fields: Vec::new() }
    }

    pub fn field(status: StatusCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        let (field, message) = (field.into(), message.into());
        Self {
            status,
            error: "invalid_field",
            message: format!("{field}: {message}"),
            fields: vec![FieldError { field, message, row: None }],
        }
    }

    pub fn bad_request(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::field(StatusCode::BAD_REQUEST, field, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn rows(errors: &[RowError]) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            error: "invalid_rows",
            message: format!("{} row error(s); nothing was stored", errors.len()),
            fields: errors
                .iter()
                .map(|e| FieldError { field: e.field.clone(), message: e.message.clone(), row: Some(e.row) })
                .collect(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let msg = e.to_string();
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        match e {
            CatalogError::MissingField(f) => Self::field(unprocessable, f.key(), msg),
            CatalogError::InvalidField { field, .. } | CatalogError::InvalidImage { field, .. } => {
                Self::field(unprocessable, field, msg)
            }
            CatalogError::UnresolvableConcept { .. } => Self::field(unprocessable, "concept", msg),
            CatalogError::UnresolvableFilter { .. } => Self::field(StatusCode::BAD_REQUEST, "concept", msg),
            CatalogError::InvalidFilter { field, .. } => Self::field(StatusCode::BAD_REQUEST, field, msg),
            CatalogError::UnknownCollection(_) | CatalogError::UnknownImage(_) | CatalogError::UnknownLocalization(_) => {
                Self::not_found(msg)
            }
            CatalogError::IllegalTransition { .. } => {
                let mut err = Self::field(StatusCode::CONFLICT, "state", msg);
                err.error = "conflict";
                err
            }
            CatalogError::DuplicateUuid(_) => Self::new(StatusCode::CONFLICT, "conflict", msg),
            CatalogError::Store(_) => {
                tracing::error!("store failure: {msg}");
                Self::internal(msg)
            }
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let msg = e.to_string();
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        match e {
            IngestError::Catalog(c) => c.into(),
            IngestError::MissingColumn(c) => Self::field(unprocessable, c, msg),
            IngestError::DuplicateColumn(c) => Self::field(unprocessable, c, msg),
            IngestError::MissingField(f) => Self::field(unprocessable, f.key(), msg),
            IngestError::InvalidField { field, .. } => Self::field(unprocessable, field, msg),
            IngestError::Meta { .. } => Self::field(unprocessable, "meta", msg),
            IngestError::NotUtf8 | IngestError::Csv(_) => Self::field(unprocessable, "csv", msg),
        }
    }
}

impl From<TaxonomyError> for ApiError {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::NotFound { .. } => Self::not_found(e.to_string()),
            TaxonomyError::MalformedName { .. } => Self::bad_request("name", e.to_string()),
            TaxonomyError::UnrankedTarget => Self::bad_request("rank", e.to_string()),
            other => Self::internal(other.to_string()),
        }
    }
}

impl From<StatsError> for ApiError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptySnapshot => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_store", e.to_string()),
            StatsError::Taxonomy(t) => t.into(),
            other => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", other.to_string()),
        }
    }
}
