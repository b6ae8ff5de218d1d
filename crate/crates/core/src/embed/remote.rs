//! HTTP client for a hosted embedding service.
//!
//! Wire protocol: `POST {base_url}/embed` with
//! `{"model": str, "role": "query"|"passage", "texts": [str]}` answered by
//! `{"dims": int, "vectors": [[float]]}`. At most 64 texts per request.
//! Transport failures and 5xx responses are retried three times with
//! exponential backoff; other failures surface immediately. A bearer
//! token, when configured, is sent on every request.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::BackendError;
use crate::scalar::Scalar;

use super::{EmbeddingBackend, EmbeddingVector, Role};

/// Environment variable read for the bearer token at construction time.
pub const TOKEN_ENV: &str = "DOX_BACKEND_TOKEN";

const BATCH_LIMIT: usize = 64;
const ATTEMPTS: u32 = 3;
const BACKOFF: [Duration; 2] = [Duration::from_millis(500), Duration::from_millis(1000)];

pub struct RemoteBackend {
    base_url: String,
    model: String,
    id: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
    backoff: Vec<Duration>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    role: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse<S> {
    dims: usize,
    vectors: Vec<Vec<S>>,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

impl RemoteBackend {
    /// Client for `base_url`, reading the bearer token from the
    /// environment.
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self::with_token(base_url, model, std::env::var(TOKEN_ENV).ok())
    }

    pub fn with_token(
        base_url: impl Into<String>,
        model: impl Into<String>,
        token: Option<String>,
    ) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        let model = model.into();
        RemoteBackend {
            id: format!("remote:{model}@{base_url}"),
            base_url,
            model,
            token,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(60))
                .build()
                .expect("http client"),
            backoff: BACKOFF.to_vec(),
        }
    }

    /// Shrinks retry pauses; test hook.
    pub fn with_backoff(mut self, backoff: Vec<Duration>) -> Self {
        self.backoff = backoff;
        self
    }

    fn post_batch<S: Scalar>(
        &self,
        texts: &[String],
        role: Role,
    ) -> Result<Vec<EmbeddingVector<S>>, BackendError> {
        let url = format!("{}/embed", self.base_url);
        let body = EmbedRequest { model: &self.model, role: role.as_str(), texts };
        let mut last_message = String::new();

        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                let pause = self.backoff[(attempt as usize - 1).min(self.backoff.len() - 1)];
                std::thread::sleep(pause);
            }
            let mut request = self.client.post(&url).json(&body);
            if let Some(token) = &self.token {
                request = request.bearer_auth(token);
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return self.parse_response(response, texts, role);
                    }
                    let message = response
                        .json::<ErrorBody>()
                        .map(|b| b.error)
                        .unwrap_or_else(|_| format!("status {status}"));
                    if status.is_server_error() {
                        last_message = format!("{status}: {message}");
                        continue;
                    }
                    // 4xx is not retryable: the request itself is wrong.
                    return Err(BackendError::RequestFailed {
                        attempts: attempt + 1,
                        message: format!("{status}: {message}"),
                        failing_batch: texts.to_vec(),
                    });
                }
                Err(e) => last_message = e.to_string(),
            }
        }
        Err(BackendError::RequestFailed {
            attempts: ATTEMPTS,
            message: last_message,
            failing_batch: texts.to_vec(),
        })
    }

    fn parse_response<S: Scalar>(
        &self,
        response: reqwest::blocking::Response,
        texts: &[String],
        role: Role,
    ) -> Result<Vec<EmbeddingVector<S>>, BackendError> {
        let parsed: EmbedResponse<S> = response
            .json()
            .map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        if parsed.vectors.len() != texts.len() {
            return Err(BackendError::InvalidResponse(format!(
                "{} vectors for {} texts",
                parsed.vectors.len(),
                texts.len()
            )));
        }
        parsed
            .vectors
            .into_iter()
            .map(|values| {
                if values.len() != parsed.dims {
                    return Err(BackendError::InvalidResponse(format!(
                        "vector of length {} with dims {}",
                        values.len(),
                        parsed.dims
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(BackendError::InvalidResponse(
                        "non-finite vector entry".into(),
                    ));
                }
                Ok(EmbeddingVector {
                    dims: parsed.dims,
                    values,
                    role,
                    backend_id: self.id.clone(),
                })
            })
            .collect()
    }
}

impl<S: Scalar> EmbeddingBackend<S> for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn batch_limit(&self) -> Option<usize> {
        Some(BATCH_LIMIT)
    }

    fn embed(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector<S>>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(BATCH_LIMIT) {
            out.extend(self.post_batch(chunk, role)?);
        }
        Ok(out)
    }
}
