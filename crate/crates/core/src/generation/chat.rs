//! Chat-completion HTTP backend.
//!
//! Sends `{"model", "messages": [{"role": "user", "content": <prompt>}],
//! "temperature", "max_tokens"}` and reads `choices[0].message.content`.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Backend, BackendConfig, CallError, DecodingParams, GenerationError};
use crate::prompt::Prompt;

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "LYRECON_API_KEY";

pub struct ChatBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: String,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl ChatBackend {
    /// Reads the credential from [`API_KEY_ENV`].
    pub fn from_env(config: &BackendConfig) -> Result<Self, GenerationError> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.trim().is_empty() => Ok(ChatBackend::new(config, key)),
            _ => Err(GenerationError::AuthMissing),
        }
    }

    pub fn new(config: &BackendConfig, api_key: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        ChatBackend {
            agent,
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            api_key: api_key.into(),
        }
    }
}

fn retryable(status: u16) -> bool {
    status == 408 || status == 409 || status == 429 || (500..=599).contains(&status)
}

impl Backend for ChatBackend {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &Prompt, decoding: &DecodingParams) -> Result<String, CallError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": decoding.temperature,
            "max_tokens": decoding.max_tokens,
        });
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| CallError::Transient(e.to_string()))?;

        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| CallError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            let message: String = text.chars().take(500).collect();
            return Err(if retryable(status) {
                CallError::Transient(format!("HTTP {status}: {message}"))
            } else {
                CallError::Rejected { status, message }
            });
        }

        let completion: Completion = serde_json::from_str(&text)
            .map_err(|e| CallError::Transient(format!("malformed completion body: {e}")))?;
        Ok(completion
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default())
    }
}
