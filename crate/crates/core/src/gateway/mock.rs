//! In-process transports for tests and offline runs.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use sha2::{Digest, Sha256};

use super::{ChatRequest, Transport, TransportError};

type Responder = dyn Fn(&ChatRequest, usize) -> Result<String, TransportError> + Send + Sync;

/// Transport backed by a closure, instrumented with call and concurrency counters.
/// The closure receives the request and its 0-based call number.
pub struct MockTransport {
    responder: Box<Responder>,
    delay: Duration,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl MockTransport {
    pub fn new(
        responder: impl Fn(&ChatRequest, usize) -> Result<String, TransportError> + Send + Sync + 'static,
    ) -> Self {
        MockTransport {
            responder: Box::new(responder),
            delay: Duration::ZERO,
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        }
    }

    /// Serves the given outcomes in order; calls past the end fail with a 500.
    pub fn scripted(outcomes: Vec<Result<String, TransportError>>) -> Self {
        let queue = Mutex::new(VecDeque::from(outcomes));
        MockTransport::new(move |_, _| {
            queue
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .pop_front()
                .unwrap_or_else(|| {
                    Err(TransportError::Status {
                        status: 500,
                        body: "mock script exhausted".into(),
                    })
                })
        })
    }

    /// Deterministic stand-in model; see [`SimulatedModel`].
    pub fn simulated() -> Self {
        MockTransport::new(|req, _| Ok(SimulatedModel::respond(req)))
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }
}

impl Transport for MockTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let out = (self.responder)(request, n);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        out
    }
}

/// Fails every call and counts the attempts. Wrap it under replay to prove a run never
/// reaches the network.
#[derive(Default)]
pub struct PoisonedTransport {
    touches: AtomicUsize,
}

impl PoisonedTransport {
    pub fn touches(&self) -> usize {
        self.touches.load(Ordering::SeqCst)
    }
}

impl Transport for PoisonedTransport {
    fn send(&self, _request: &ChatRequest) -> Result<String, TransportError> {
        self.touches.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Poisoned)
    }
}

// Ordered from least to most cooperative; indexed by the contribution jitter.
const COLLECTIVE_REASONS: [&str; 3] = [
    "I will hold back slightly this round but still support the pool.",
    "Contributing most of my points keeps the pool productive and encourages cooperation.",
    "Trust and mutual cooperation make the pool grow for everyone together.",
];
const NEUTRAL_REASONS: [&str; 3] = [
    "I keep a bit more this round to protect my own total.",
    "A moderate contribution balances my points against the shared pool.",
    "Adding a little more to the pool seems fair if we cooperate.",
];
const SELFISH_REASONS: [&str; 3] = [
    "Keeping nearly everything maximizes my own payoff; others can free-ride if they like.",
    "Keeping most points maximizes my own payoff while the pool still returns something.",
    "I keep most points but add a little to the pool to keep things fair.",
];

/// A cheap deterministic "model" for offline pipelines.
///
/// Game requests get a contribution keyed off the persona sentence of the system prompt
/// (collective high, selfish low, neutral middle) with a small hash-derived jitter; judge
/// requests get a keyword score. Responses are a pure function of the request, so replaying
/// or re-running reproduces them exactly.
pub struct SimulatedModel;

impl SimulatedModel {
    pub fn respond(request: &ChatRequest) -> String {
        let system = request.system_prompt().unwrap_or_default();
        let user = request.last_user_message().unwrap_or_default();
        if system.contains(crate::analysis::sentiment::RUBRIC_MARKER) {
            return format!("{:.1}", Self::judge_score(user));
        }

        let endowment = Self::endowment(user);
        let hash = Sha256::digest(request.request_hash().as_bytes());
        let jitter = (hash[0] % 3) as i64 - 1;
        let (base, reasons) = if system.contains("collective welfare")
            || system.contains("mutual benefit")
        {
            (endowment as i64 * 8 / 10, COLLECTIVE_REASONS)
        } else if system.contains("self-payoff")
            || system.contains("self payoff")
            || system.contains("individual point accumulation")
        {
            (endowment as i64 * 2 / 10, SELFISH_REASONS)
        } else {
            (endowment as i64 / 2, NEUTRAL_REASONS)
        };
        let reason = reasons[(jitter + 1) as usize];
        let contribution = (base + jitter).clamp(0, endowment as i64);
        if system.contains("'reasoning'") {
            serde_json::json!({ "reasoning": reason, "contribution": contribution }).to_string()
        } else {
            serde_json::json!({ "contribution": contribution }).to_string()
        }
    }

    fn endowment(user: &str) -> u32 {
        static PATTERN: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
        let re = PATTERN.get_or_init(|| Regex::new(r"(?:between 0 and|from 0 to) (\d+)").unwrap());
        re.captures_iter(user)
            .last()
            .and_then(|c| c[1].parse().ok())
            .unwrap_or(10)
    }

    fn judge_score(text: &str) -> f64 {
        let lower = text.to_lowercase();
        let count = |words: &[&str]| words.iter().map(|w| lower.matches(w).count()).sum::<usize>();
        let positive = count(&["cooperat", "pool", "together", "mutual", "trust", "fair"]);
        let negative = count(&["keep", "maximiz", "my own", "defect", "free-rid", "exploit"]);
        (0.5 + 0.1 * (positive as f64 - negative as f64)).clamp(0.0, 1.0)
    }
}
