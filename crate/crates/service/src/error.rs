use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use cognitrace::highlight::HighlightError;
use cognitrace::session::SessionError;
use cognitrace::workflow::WorkflowError;
use serde::Serialize;

/// JSON error body: `{"error": kind, "message": ..., "line"?, "col"?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            error,
            message: message.into(),
            line: None,
            col: None,
        }
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        match e {
            WorkflowError::IllegalTransition { .. } => Self::new(StatusCode::CONFLICT, "illegal_transition", e.to_string()),
            WorkflowError::InvalidPayload(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_payload", e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Highlight(HighlightError::Script(s)) => ApiError {
                line: Some(s.line),
                col: Some(s.col),
                ..Self::new(StatusCode::BAD_REQUEST, "script", s.message)
            },
            SessionError::Highlight(h) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "evaluation", h.to_string()),
            other => Self::internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
