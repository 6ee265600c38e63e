//! Provider-agnostic chat completion.
//!
//! Everything that talks to a model goes through [`Gateway::chat_complete`]. The gateway owns
//! the retry/backoff loop and the global in-flight cap; a [`Transport`] performs exactly one
//! attempt. Transports:
//!
//! - [`http::HttpTransport`]: live providers, chat-completions and messages dialects
//! - [`replay::RecordReplay`]: record to / replay from a fixture file
//! - [`mock::MockTransport`], [`mock::PoisonedTransport`]: tests and offline runs

pub mod http;
pub mod mock;
pub mod replay;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use http::{Dialect, HttpTransport, ProviderConfig};
pub use mock::{MockTransport, PoisonedTransport, SimulatedModel};
pub use replay::{Fixture, FixtureEntry, RecordReplay, ReplayMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub provider: String,
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    /// Stable conversation identifier (game seed and seat). Part of the fixture hash so two
    /// games that open with identical prompts replay their own responses.
    #[serde(default)]
    pub session_key: Option<String>,
}

#[derive(Serialize)]
struct HashedRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    session_key: Option<&'a str>,
}

impl ChatRequest {
    /// First message is the system prompt, then user and assistant turns alternate,
    /// ending on a user turn.
    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |msg: &str| Err(GatewayError::InvalidRequest(msg.to_string()));
        if self.model.trim().is_empty() {
            return invalid("model id is empty");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return invalid("temperature must be within [0, 2]");
        }
        let Some((first, rest)) = self.messages.split_first() else {
            return invalid("no messages");
        };
        if first.role != Role::System {
            return invalid("first message must be the system prompt");
        }
        if rest.is_empty() {
            return invalid("no user message after the system prompt");
        }
        for (i, msg) in rest.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if msg.role != expected {
                return invalid("user and assistant turns must alternate, starting with user");
            }
        }
        if rest.len() % 2 == 0 {
            return invalid("last message must be a user turn");
        }
        Ok(())
    }

    /// Content hash over model, messages, temperature and session key (hex SHA-256).
    pub fn request_hash(&self) -> String {
        let canonical = serde_json::to_vec(&HashedRequest {
            model: &self.model,
            messages: &self.messages,
            temperature: self.temperature,
            session_key: self.session_key.as_deref(),
        })
        .expect("request serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn system_prompt(&self) -> Option<&str> {
        self.messages
            .first()
            .filter(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
    }

    pub fn last_user_message(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransportPolicy {
    pub max_in_flight: usize,
    /// Extra attempts after the first for transient failures.
    pub retry_budget: u32,
    pub backoff_base_ms: u64,
    pub backoff_multiplier: f64,
    pub timeout_ms: u64,
}

impl Default for TransportPolicy {
    fn default() -> Self {
        TransportPolicy {
            max_in_flight: 8,
            retry_budget: 4,
            backoff_base_ms: 500,
            backoff_multiplier: 2.0,
            timeout_ms: 120_000,
        }
    }
}

impl TransportPolicy {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_in_flight == 0
            || self.backoff_base_ms == 0
            || self.timeout_ms == 0
            || self.backoff_multiplier.is_nan()
            || self.backoff_multiplier < 1.0
        {
            return Err(GatewayError::InvalidPolicy(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Delay before retry number `retry` (0-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let ms = self.backoff_base_ms as f64 * self.backoff_multiplier.powi(retry as i32);
        Duration::from_millis(ms.min(600_000.0) as u64)
    }
}

/// Outcome of a single transport attempt.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited")]
    RateLimited,
    #[error("request timed out")]
    Timeout,
    #[error("provider returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("could not decode provider response: {0}")]
    Decode(String),
    #[error("fixture file {0} does not exist")]
    FixtureMissing(String),
    #[error("no recorded response for request {hash}")]
    HashMismatch { hash: String },
    #[error("network access attempted through a poisoned transport")]
    Poisoned,
    #[error("unknown provider {0:?}")]
    UnknownProvider(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl TransportError {
    pub fn is_transient(&self) -> bool {
        match self {
            TransportError::RateLimited | TransportError::Timeout | TransportError::Network(_) => {
                true
            }
            TransportError::Status { status, .. } => *status >= 500 || *status == 408,
            _ => false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("provider error {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("network error after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid transport policy: {0}")]
    InvalidPolicy(String),
    #[error("fixture file {0} does not exist")]
    FixtureMissing(String),
    #[error("no recorded response for request {hash}")]
    HashMismatch { hash: String },
    #[error("network access attempted through a poisoned transport")]
    Poisoned,
    #[error("unknown provider {0:?}")]
    UnknownProvider(String),
    #[error("could not decode provider response: {0}")]
    Decode(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl GatewayError {
    fn from_attempt(err: TransportError, attempts: u32) -> Self {
        match err {
            TransportError::Auth(m) => GatewayError::Auth(m),
            TransportError::RateLimited => GatewayError::RateLimited { attempts },
            TransportError::Timeout => GatewayError::Timeout { attempts },
            TransportError::Status { status, body } => GatewayError::Provider { status, body },
            TransportError::Network(message) => GatewayError::Network { attempts, message },
            TransportError::Decode(m) => GatewayError::Decode(m),
            TransportError::FixtureMissing(p) => GatewayError::FixtureMissing(p),
            TransportError::HashMismatch { hash } => GatewayError::HashMismatch { hash },
            TransportError::Poisoned => GatewayError::Poisoned,
            TransportError::UnknownProvider(p) => GatewayError::UnknownProvider(p),
            TransportError::Io(m) => GatewayError::Io(m),
        }
    }
}

/// Performs one attempt of one request.
pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        (**self).send(request)
    }
}

struct InFlightLimiter {
    max: usize,
    current: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlightLimiter);

impl InFlightLimiter {
    fn new(max: usize) -> Self {
        InFlightLimiter {
            max,
            current: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut current = self.current.lock().unwrap_or_else(|e| e.into_inner());
        while *current >= self.max {
            current = self.freed.wait(current).unwrap_or_else(|e| e.into_inner());
        }
        *current += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut current = self.0.current.lock().unwrap_or_else(|e| e.into_inner());
        *current -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    pub requests: u64,
    pub attempts: u64,
    pub retries: u64,
    pub failures: u64,
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    attempts: AtomicU64,
    retries: AtomicU64,
    failures: AtomicU64,
}

/// Shared handle for all model calls of a run.
pub struct Gateway {
    transport: Arc<dyn Transport>,
    policy: TransportPolicy,
    limiter: InFlightLimiter,
    counters: Counters,
}

impl Gateway {
    pub fn new(transport: Arc<dyn Transport>, policy: TransportPolicy) -> Result<Self, GatewayError> {
        policy.validate()?;
        Ok(Gateway {
            limiter: InFlightLimiter::new(policy.max_in_flight),
            transport,
            policy,
            counters: Counters::default(),
        })
    }

    pub fn policy(&self) -> &TransportPolicy {
        &self.policy
    }

    pub fn chat_complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        request.validate()?;
        self.counters.requests.fetch_add(1, Ordering::Relaxed);
        let _permit = self.limiter.acquire();
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            self.counters.attempts.fetch_add(1, Ordering::Relaxed);
            match self.transport.send(request) {
                Ok(text) => return Ok(text),
                Err(err) if err.is_transient() && attempts <= self.policy.retry_budget => {
                    self.counters.retries.fetch_add(1, Ordering::Relaxed);
                    std::thread::sleep(self.policy.backoff(attempts - 1));
                }
                Err(err) => {
                    self.counters.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(GatewayError::from_attempt(err, attempts));
                }
            }
        }
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            requests: self.counters.requests.load(Ordering::Relaxed),
            attempts: self.counters.attempts.load(Ordering::Relaxed),
            retries: self.counters.retries.load(Ordering::Relaxed),
            failures: self.counters.failures.load(Ordering::Relaxed),
        }
    }
}
