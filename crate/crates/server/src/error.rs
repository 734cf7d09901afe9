use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lingkod_core::PlatformError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("could not bind: {0}")]
    BindFailure(String),
    #[error("storage failure: {0}")]
    Storage(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found")]
    NotFound,
    #[error("method not allowed")]
    MethodNotAllowed,
}

/// Wire shape of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Platform(e) => e.code(),
            ServiceError::ConfigInvalid(_) => "ConfigInvalid",
            ServiceError::BindFailure(_) => "BindFailure",
            ServiceError::Storage(_) => "StorageError",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::NotFound => "NotFound",
            ServiceError::MethodNotAllowed => "MethodNotAllowed",
        }
    }

    pub fn status(&self) -> StatusCode {
        use PlatformError as P;
        match self {
            ServiceError::Platform(e) => match e {
                P::InvalidToken => StatusCode::UNAUTHORIZED,
                P::NotRecipient | P::NotParticipant | P::NotConnected | P::NotResearcher => StatusCode::FORBIDDEN,
                P::UnknownUser | P::UnknownTask | P::UnknownItem | P::UnknownConnection | P::UnknownCountry(_) => {
                    StatusCode::NOT_FOUND
                }
                P::NotFinished | P::TaskCompleted | P::ConnectionNotAccepted => StatusCode::CONFLICT,
                e if e.is_conflict() => StatusCode::CONFLICT,
                P::DetectorUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound => StatusCode::NOT_FOUND,
            ServiceError::MethodNotAllowed => StatusCode::METHOD_NOT_ALLOWED,
            ServiceError::ConfigInvalid(_) | ServiceError::BindFailure(_) | ServiceError::Storage(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }

    pub fn body(&self) -> ErrorBody {
        let message = match self {
            // internal detail stays in the log
            ServiceError::Storage(_) => "storage failure".to_owned(),
            other => other.to_string(),
        };
        ErrorBody { code: self.code().to_owned(), message }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if let ServiceError::Storage(detail) = &self {
            tracing::error!(%detail, "storage failure");
        }
        (self.status(), Json(self.body())).into_response()
    }
}
