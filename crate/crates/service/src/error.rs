//! Service errors and their HTTP mapping.
//!
//! 400 for invalid requests, 404 for unknown identifiers, 409 for operations
//! the current state refuses (locked insets, subsections of unopened
//! regions), 422 for table parse and assembly build failures.

use axum::extract::multipart::MultipartError;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use foldscope_core::{FoldError, InsetError, MetricsError, ModelError, ParseError, TaskError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{message}")]
    NotFound { code: &'static str, message: String },
    #[error("{message}")]
    Invalid { code: &'static str, message: String },
    #[error("{message}")]
    Conflict { code: &'static str, message: String },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Build(#[from] ModelError),
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
}

impl ServiceError {
    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ServiceError::NotFound {
            code,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ServiceError::Invalid {
            code: "invalid_request",
            message: message.into(),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound { .. } => StatusCode::NOT_FOUND,
            ServiceError::Invalid { .. } => StatusCode::BAD_REQUEST,
            ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::Parse(_) | ServiceError::Build(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound { code, .. }
            | ServiceError::Invalid { code, .. }
            | ServiceError::Conflict { code, .. } => code,
            ServiceError::Parse(_) => "parse_error",
            ServiceError::Build(_) => "build_error",
            ServiceError::Storage(_) => "storage_error",
        }
    }

    pub fn body(&self) -> serde_json::Value {
        let mut body = json!({ "error": self.code(), "message": self.to_string() });
        if let ServiceError::Parse(e) = self {
            body["line"] = json!(e.line());
            body["detail"] = serde_json::to_value(e).unwrap_or_default();
        }
        body
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}

impl From<FoldError> for ServiceError {
    fn from(e: FoldError) -> Self {
        let message = e.to_string();
        match e {
            FoldError::UnknownChromosome(_) => ServiceError::not_found("unknown_chromosome", message),
            FoldError::UnknownRegion { .. } => ServiceError::not_found("unknown_region", message),
            FoldError::UnknownSubsection { .. } => ServiceError::not_found("unknown_subsection", message),
            FoldError::ParentNotOpen { .. } => ServiceError::Conflict {
                code: "parent_not_open",
                message,
            },
            FoldError::SubsectionNotOpen(_) => ServiceError::Conflict {
                code: "subsection_not_open",
                message,
            },
            FoldError::ChromosomeMismatch { .. }
            | FoldError::PositionOutOfRange { .. }
            | FoldError::LayoutOutOfRange { .. }
            | FoldError::InvalidConfig(_) => ServiceError::invalid(message),
        }
    }
}

impl From<InsetError> for ServiceError {
    fn from(e: InsetError) -> Self {
        let message = e.to_string();
        match e {
            InsetError::UnknownInset(_) => ServiceError::not_found("unknown_inset", message),
            InsetError::UnknownChromosome(_) => ServiceError::not_found("unknown_chromosome", message),
            InsetError::InsetLocked(_) => ServiceError::Conflict {
                code: "inset_locked",
                message,
            },
            InsetError::RegionNotInScope { .. } => ServiceError::Invalid {
                code: "region_not_in_scope",
                message,
            },
            InsetError::PositionOutOfRange { .. }
            | InsetError::ZeroLengthScope(_)
            | InsetError::InvalidFrame
            | InsetError::InvalidViewport => ServiceError::invalid(message),
        }
    }
}

impl From<TaskError> for ServiceError {
    fn from(e: TaskError) -> Self {
        let message = e.to_string();
        match e {
            TaskError::UnknownChromosome(_) => ServiceError::not_found("unknown_chromosome", message),
            TaskError::UnknownRegion { .. } => ServiceError::not_found("unknown_region", message),
            TaskError::UnknownPhenotype(_) => ServiceError::not_found("unknown_phenotype", message),
            TaskError::NoFeasibleTask(_) => ServiceError::Conflict {
                code: "no_feasible_task",
                message,
            },
            TaskError::AnswerTypeMismatch { .. } => ServiceError::Invalid {
                code: "answer_type_mismatch",
                message,
            },
            TaskError::NoPhenotypes => ServiceError::invalid(message),
        }
    }
}

impl From<MetricsError> for ServiceError {
    fn from(e: MetricsError) -> Self {
        ServiceError::Invalid {
            code: "invalid_event",
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ServiceError {
    fn from(e: JsonRejection) -> Self {
        ServiceError::Invalid {
            code: "invalid_json",
            message: e.body_text(),
        }
    }
}

impl From<QueryRejection> for ServiceError {
    fn from(e: QueryRejection) -> Self {
        ServiceError::Invalid {
            code: "invalid_query",
            message: e.body_text(),
        }
    }
}

impl From<MultipartError> for ServiceError {
    fn from(e: MultipartError) -> Self {
        ServiceError::Invalid {
            code: "invalid_multipart",
            message: e.body_text(),
        }
    }
}
