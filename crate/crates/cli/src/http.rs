//! Forward-translation backend over HTTP.
//!
//! Each batch is one `POST` of
//! `{"texts": [...], "source": "es", "target": "quy"}`; the service answers
//! `{"translations": [...]}` with one string per input, in order.

use std::time::Duration;

use mtprep_core::augment::{BackendError, TranslationBackend};
use mtprep_core::LangCode;
use serde::{Deserialize, Serialize};

pub const URL_ENV: &str = "MTPREP_BACKEND_URL";
pub const BATCH_ENV: &str = "MTPREP_BACKEND_BATCH";

#[derive(Serialize)]
struct Request<'a> {
    texts: &'a [String],
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct Response {
    translations: Vec<String>,
}

pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout_connect(Duration::from_secs(10))
            .timeout(Duration::from_secs(600))
            .build();
        HttpBackend {
            endpoint: endpoint.into(),
            agent,
        }
    }

    /// Endpoint from `MTPREP_BACKEND_URL`.
    pub fn from_env() -> Option<Self> {
        std::env::var(URL_ENV).ok().filter(|u| !u.is_empty()).map(HttpBackend::new)
    }
}

impl TranslationBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn translate(
        &self,
        texts: &[String],
        src: &LangCode,
        tgt: &LangCode,
    ) -> Result<Vec<String>, BackendError> {
        let body = Request {
            texts,
            source: src.as_str(),
            target: tgt.as_str(),
        };
        let resp = self
            .agent
            .post(&self.endpoint)
            .send_json(&body)
            .map_err(|e| BackendError(e.to_string()))?;
        let parsed: Response = resp
            .into_json()
            .map_err(|e| BackendError(format!("malformed response: {e}")))?;
        Ok(parsed.translations)
    }
}

/// Batch size from `MTPREP_BACKEND_BATCH`, if set.
pub fn batch_from_env() -> Result<Option<usize>, String> {
    match std::env::var(BATCH_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| format!("{BATCH_ENV}={v:?} is not a positive integer")),
        Err(_) => Ok(None),
    }
}
