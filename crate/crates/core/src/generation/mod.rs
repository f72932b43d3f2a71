//! Prompt to lyrics: pluggable backends behind a content-addressed cache,
//! with retries and a bounded number of requests in flight.

mod cache;
mod chat;
mod mock;

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Duration;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompt::Prompt;

pub use cache::ResultCache;
pub use chat::{ChatBackend, API_KEY_ENV};
pub use mock::{mock_generate, MockBackend, MOCK_MODEL};

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("backend unavailable after {attempts} attempt(s): {last_error}")]
    BackendUnavailable { attempts: u32, last_error: String },
    #[error("backend rejected the request (HTTP {status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("environment variable {API_KEY_ENV} is not set")]
    AuthMissing,
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}

impl GenerationError {
    /// Errors that end the whole run instead of failing a single track.
    pub fn is_fatal(&self) -> bool {
        matches!(
            self,
            GenerationError::AuthMissing
                | GenerationError::InvalidConfig(_)
                | GenerationError::Cache(_)
        )
    }
}

/// Failure of a single backend call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallError {
    /// Worth retrying: timeouts, connection failures, 429 and 5xx.
    Transient(String),
    /// Retrying will not help.
    Rejected { status: u16, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodingParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            temperature: 0.7,
            max_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff_secs: f64,
    pub max_backoff_secs: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_backoff_secs: 1.0,
            max_backoff_secs: 60.0,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`,
    /// capped at `max_backoff_secs`.
    pub fn backoff(&self, retry: u32) -> Duration {
        let exp = retry.saturating_sub(1).min(62);
        let secs = (self.base_backoff_secs * (1u64 << exp) as f64).min(self.max_backoff_secs);
        Duration::from_secs_f64(secs.max(0.0))
    }

    /// Every delay a fully failing request would wait through.
    pub fn schedule(&self) -> Vec<Duration> {
        (1..self.max_attempts).map(|r| self.backoff(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub decoding: DecodingParams,
    pub timeout_secs: f64,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            decoding: DecodingParams::default(),
            timeout_secs: 120.0,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::InvalidConfig(m.to_string()));
        if self.retry.max_attempts < 1 {
            return bad("max attempts must be at least 1");
        }
        if self.max_in_flight < 1 {
            return bad("max in-flight requests must be at least 1");
        }
        if !(self.decoding.temperature >= 0.0 && self.decoding.temperature.is_finite()) {
            return bad("temperature must be a finite value >= 0");
        }
        if self.decoding.max_tokens < 1 {
            return bad("max tokens must be positive");
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if !(self.retry.base_backoff_secs >= 0.0 && self.retry.max_backoff_secs >= 0.0) {
            return bad("backoff must not be negative");
        }
        Ok(())
    }
}

/// Hex SHA-256 over the prompt text, model name and decoding parameters.
pub fn cache_key(prompt_text: &str, model: &str, decoding: &DecodingParams) -> String {
    let mut hasher = Sha256::new();
    // length-prefixed so field boundaries cannot shift
    for part in [
        prompt_text,
        model,
        &format!("{:?}", decoding.temperature),
        &decoding.max_tokens.to_string(),
    ] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub track_id: String,
    pub prompt_digest: String,
    pub lyrics: String,
    pub model: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub cached: bool,
}

/// Something that turns a prompt into text.
pub trait Backend: Send + Sync {
    /// Model identifier recorded in results and mixed into cache keys.
    fn model(&self) -> &str;

    fn complete(&self, prompt: &Prompt, decoding: &DecodingParams) -> Result<String, CallError>;

    /// Timestamp for a fresh result.
    fn timestamp(&self) -> DateTime<Utc> {
        Utc::now().trunc_subsecs(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerationStats {
    /// Requests handed to the backend, retries included.
    pub backend_calls: u64,
    pub cache_hits: u64,
    pub retries: u64,
}

/// Drives a backend with caching and retries.
pub struct Generator {
    backend: Box<dyn Backend>,
    config: BackendConfig,
    cache: Option<ResultCache>,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
    retries: AtomicU64,
    sleep: fn(Duration),
}

impl Generator {
    pub fn new(
        backend: Box<dyn Backend>,
        config: BackendConfig,
        cache: Option<ResultCache>,
    ) -> Result<Self, GenerationError> {
        config.validate()?;
        Ok(Generator {
            backend,
            config,
            cache,
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            retries: AtomicU64::new(0),
            sleep: std::thread::sleep,
        })
    }

    /// Replaces the function used to wait between retries.
    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn model(&self) -> &str {
        self.backend.model()
    }

    pub fn stats(&self) -> GenerationStats {
        GenerationStats {
            backend_calls: self.backend_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            retries: self.retries.load(Ordering::SeqCst),
        }
    }

    pub fn cache_key(&self, prompt: &Prompt) -> String {
        cache_key(&prompt.text, self.backend.model(), &self.config.decoding)
    }

    pub fn generate(&self, prompt: &Prompt) -> Result<GenerationResult, GenerationError> {
        let digest = self.cache_key(prompt);
        if let Some(cache) = &self.cache {
            if let Some(mut hit) = cache.get(&digest)? {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                hit.cached = true;
                hit.track_id = prompt.track_id.clone();
                return Ok(hit);
            }
        }

        let policy = self.config.retry;
        let mut attempt = 0;
        let lyrics = loop {
            attempt += 1;
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            match self.backend.complete(prompt, &self.config.decoding) {
                Ok(text) if text.trim().is_empty() => return Err(GenerationError::EmptyCompletion),
                Ok(text) => break text,
                Err(CallError::Rejected { status, message }) => {
                    return Err(GenerationError::Rejected { status, message })
                }
                Err(CallError::Transient(last_error)) => {
                    if attempt >= policy.max_attempts {
                        return Err(GenerationError::BackendUnavailable {
                            attempts: attempt,
                            last_error,
                        });
                    }
                    log::debug!(
                        "{}: attempt {attempt} failed: {last_error}",
                        prompt.track_id
                    );
                    self.retries.fetch_add(1, Ordering::SeqCst);
                    (self.sleep)(policy.backoff(attempt));
                }
            }
        };

        let result = GenerationResult {
            track_id: prompt.track_id.clone(),
            prompt_digest: digest,
            lyrics,
            model: self.backend.model().to_string(),
            created_at: self.backend.timestamp(),
            cached: false,
        };
        match &self.cache {
            Some(cache) => {
                let mut kept = cache.put(&result)?;
                kept.track_id = result.track_id;
                Ok(kept)
            }
            None => Ok(result),
        }
    }

    /// Generates every prompt with at most `max_in_flight` requests running.
    /// `on_result` runs on worker threads as each prompt finishes; returning
    /// `false` stops workers from picking up further prompts.
    pub fn generate_batch<F>(&self, prompts: &[Prompt], on_result: F)
    where
        F: Fn(&Prompt, Result<GenerationResult, GenerationError>) -> bool + Sync,
    {
        let next = AtomicUsize::new(0);
        let stop = std::sync::atomic::AtomicBool::new(false);
        let workers = self.config.max_in_flight.min(prompts.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(prompt) = prompts.get(i) else { break };
                    if !on_result(prompt, self.generate(prompt)) {
                        stop.store(true, Ordering::SeqCst);
                    }
                });
            }
        });
    }
}
