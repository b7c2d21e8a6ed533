//! Human review: batch protocol, event-sourced store, view payloads and the
//! HTTP service.

pub mod payload;
pub mod protocol;
pub mod server;
pub mod store;

use serde::Serialize;

/// An error reported to API clients as `{code, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}
