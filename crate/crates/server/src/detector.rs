use std::sync::Arc;
use std::time::Duration;

use lingkod_core::evaluation::{AiTextDetector, DetectorOff, DetectorUnavailable, DetectorVerdict, MockDetector};
use serde::Deserialize;
use serde_json::json;

use crate::config::{DetectorMode, ServiceConfig};
use crate::error::ServiceError;

/// Probability above which a document counts as machine-written.
pub const AI_PROBABILITY_CUTOFF: f64 = 0.5;

/// HTTP detector client.
///
/// Sends `{"document": text}` as JSON, with the key (if any) in the
/// `x-api-key` header. Understands either `{"ai_generated": bool}` or a
/// `{"documents":[{"completely_generated_prob": p}]}` body. Blocking, so
/// async callers run it on the blocking pool.
#[derive(Debug, Clone)]
pub struct RemoteDetector {
    pub url: String,
    pub key: Option<String>,
    pub timeout: Duration,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RemoteReply {
    Direct { ai_generated: bool },
    Documents { documents: Vec<RemoteDocument> },
}

#[derive(Deserialize)]
struct RemoteDocument {
    completely_generated_prob: f64,
}

impl RemoteDetector {
    pub fn new(url: impl Into<String>, key: Option<String>) -> Self {
        Self { url: url.into(), key, timeout: Duration::from_secs(10) }
    }
}

impl AiTextDetector for RemoteDetector {
    fn classify(&self, text: &str) -> Result<DetectorVerdict, DetectorUnavailable> {
        let unavailable = |e: &dyn std::fmt::Display| DetectorUnavailable(e.to_string());
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| unavailable(&e))?;
        let mut req = client.post(&self.url).json(&json!({ "document": text }));
        if let Some(key) = &self.key {
            req = req.header("x-api-key", key);
        }
        let resp = req.send().map_err(|e| unavailable(&e))?;
        if !resp.status().is_success() {
            return Err(DetectorUnavailable(format!("detector answered {}", resp.status())));
        }
        match resp.json::<RemoteReply>().map_err(|e| unavailable(&e))? {
            RemoteReply::Direct { ai_generated } => Ok(DetectorVerdict { ai_generated, detail: None }),
            RemoteReply::Documents { documents } => {
                let p = documents
                    .first()
                    .ok_or_else(|| DetectorUnavailable("empty detector reply".into()))?
                    .completely_generated_prob;
                Ok(DetectorVerdict {
                    ai_generated: p > AI_PROBABILITY_CUTOFF,
                    detail: Some(format!("completely_generated_prob={p:.3}")),
                })
            }
        }
    }
}

pub fn build(config: &ServiceConfig) -> Result<Arc<dyn AiTextDetector>, ServiceError> {
    Ok(match config.detector_mode {
        DetectorMode::Off => Arc::new(DetectorOff),
        DetectorMode::Mock => Arc::new(MockDetector {
            verdicts: config.detector_mock_table.iter().map(|(k, v)| (k.trim().to_owned(), *v)).collect(),
        }),
        DetectorMode::Remote => {
            let url = config
                .detector_url
                .clone()
                .ok_or_else(|| ServiceError::ConfigInvalid("remote detector needs a URL".into()))?;
            Arc::new(RemoteDetector::new(url, config.detector_key.clone()))
        }
    })
}
