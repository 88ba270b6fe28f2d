//! Chat-completion backends.
//!
//! [`HttpBackend`] speaks the widely used OpenAI-compatible
//! `/chat/completions` wire format; [`ScriptedBackend`] replays canned
//! fixtures so every pipeline test runs offline and deterministically. No
//! other module performs network I/O.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the API key for live backends. The
/// OpenAI-conventional name is accepted as a fallback.
pub const API_KEY_ENV: &str = "SEQTREE_API_KEY";
pub const API_KEY_ENV_FALLBACK: &str = "OPENAI_API_KEY";
/// Environment variable overriding the configured base URL.
pub const BASE_URL_ENV: &str = "SEQTREE_BASE_URL";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no API key: set {API_KEY_ENV} or {API_KEY_ENV_FALLBACK}")]
    MissingApiKey,
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("backend returned HTTP {status}: {body}")]
    BadRequest { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: usize, last: String },
    #[error("malformed completion response: {0}")]
    BadResponse(String),
    #[error("scripted fixture exhausted after {served} replies")]
    FixtureExhausted { served: usize },
    #[error("no scripted rule matches the prompt")]
    NoFixtureMatch,
}

impl LlmError {
    /// Transient failures let generation degrade gracefully (a node falls
    /// back to raw features); configuration failures abort the run.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            LlmError::Transport(_)
                | LlmError::Timeout
                | LlmError::RetriesExhausted { .. }
                | LlmError::BadResponse(_)
        )
    }
}

/// A text-in, text-out completion backend.
pub trait TextBackend: Sync {
    fn chat(&self, system: &str, user: &str) -> Result<String, LlmError>;
}

/// Connection and sampling parameters for a live backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendParams {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub timeout_secs: u64,
    pub max_retries: usize,
    /// Concurrent in-flight request cap across all worker threads.
    pub max_in_flight: usize,
}

impl Default for BackendParams {
    fn default() -> Self {
        BackendParams {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            temperature: 1.0,
            top_p: 0.95,
            timeout_secs: 120,
            max_retries: 3,
            max_in_flight: 4,
        }
    }
}

impl BackendParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.top_p) {
            return Err("top_p must be in [0,1]".into());
        }
        if self.temperature < 0.0 {
            return Err("temperature must be >= 0".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    temperature: f64,
    top_p: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: Option<String>,
}

/// The JSON body sent to `/chat/completions`. Exposed so tests can check
/// that request bodies embed the rendered prompts byte-for-byte.
pub fn build_request_body(params: &BackendParams, system: &str, user: &str) -> serde_json::Value {
    serde_json::to_value(ChatRequest {
        model: &params.model,
        messages: [
            ChatMessage {
                role: "system",
                content: system,
            },
            ChatMessage {
                role: "user",
                content: user,
            },
        ],
        temperature: params.temperature,
        top_p: params.top_p,
    })
    .expect("request body serialization is infallible")
}

/// Counting semaphore bounding concurrent requests.
struct InFlightGate {
    capacity: usize,
    state: Mutex<usize>,
    cv: Condvar,
}

impl InFlightGate {
    fn new(capacity: usize) -> Self {
        InFlightGate {
            capacity,
            state: Mutex::new(0),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut in_flight = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while *in_flight >= self.capacity {
            in_flight = self.cv.wait(in_flight).unwrap_or_else(|e| e.into_inner());
        }
        *in_flight += 1;
        drop(in_flight);
        let out = f();
        *self.state.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        self.cv.notify_one();
        out
    }
}

/// Live OpenAI-compatible chat client with exponential backoff on
/// transient failures. The API key is read from the environment at
/// construction; secrets never appear in configs or logs.
pub struct HttpBackend {
    params: BackendParams,
    api_key: String,
    agent: ureq::Agent,
    gate: InFlightGate,
}

impl HttpBackend {
    pub fn new(params: BackendParams) -> Result<HttpBackend, LlmError> {
        params
            .validate()
            .map_err(|e| LlmError::Transport(format!("invalid backend params: {e}")))?;
        let api_key = std::env::var(API_KEY_ENV)
            .or_else(|_| std::env::var(API_KEY_ENV_FALLBACK))
            .map_err(|_| LlmError::MissingApiKey)?;
        let mut params = params;
        if let Ok(base) = std::env::var(BASE_URL_ENV) {
            params.base_url = base;
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(params.timeout_secs)))
            .build()
            .into();
        let gate = InFlightGate::new(params.max_in_flight);
        Ok(HttpBackend {
            params,
            api_key,
            agent,
            gate,
        })
    }

    pub fn params(&self) -> &BackendParams {
        &self.params
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.params.base_url.trim_end_matches('/'))
    }

    fn send_once(&self, body: &serde_json::Value) -> Result<String, LlmError> {
        let result = self.gate.run(|| {
            self.agent
                .post(&self.endpoint())
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(body)
        });
        let mut response = result.map_err(|e| match e {
            ureq::Error::Timeout(_) => LlmError::Timeout,
            other => LlmError::Transport(other.to_string()),
        })?;
        let status = response.status().as_u16();
        match status {
            200 => {
                let parsed: ChatResponse = response
                    .body_mut()
                    .read_json()
                    .map_err(|e| LlmError::BadResponse(e.to_string()))?;
                parsed
                    .choices
                    .first()
                    .and_then(|c| c.message.content.clone())
                    .ok_or_else(|| LlmError::BadResponse("no choices in response".into()))
            }
            401 | 403 => Err(LlmError::Auth { status }),
            _ => {
                let body = response
                    .body_mut()
                    .read_to_string()
                    .unwrap_or_default();
                Err(LlmError::BadRequest { status, body })
            }
        }
    }
}

/// Whether a failed call should be retried: transport trouble, rate
/// limiting, and server-side errors are retryable; schema-level 4xx
/// responses are not.
fn should_retry(err: &LlmError) -> bool {
    match err {
        LlmError::Transport(_) | LlmError::Timeout => true,
        LlmError::BadRequest { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

impl TextBackend for HttpBackend {
    fn chat(&self, system: &str, user: &str) -> Result<String, LlmError> {
        let body = build_request_body(&self.params, system, user);
        let mut last: Option<LlmError> = None;
        for attempt in 0..=self.params.max_retries {
            if attempt > 0 {
                let backoff = Duration::from_millis(250u64 << (attempt - 1).min(6));
                std::thread::sleep(backoff);
            }
            match self.send_once(&body) {
                Ok(text) => return Ok(text),
                Err(e) if should_retry(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(LlmError::RetriesExhausted {
            attempts: self.params.max_retries + 1,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    }
}

/// How a scripted fixture selects replies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Fixture {
    /// Replies served in order by a shared cursor.
    RoundRobin {
        replies: Vec<String>,
        #[serde(default)]
        on_exhausted: ExhaustPolicy,
    },
    /// The first rule whose `contains` text occurs in the user prompt
    /// serves its replies in rotation.
    Substring { rules: Vec<SubstringRule> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstringRule {
    pub contains: String,
    pub replies: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustPolicy {
    #[default]
    Wrap,
    Error,
}

/// Deterministic offline backend replaying a [`Fixture`].
///
/// Substring rules with a single reply are stateless and therefore
/// deterministic even when the tree frontier is generated concurrently;
/// a shared round-robin cursor is deterministic only under sequential
/// growth.
pub struct ScriptedBackend {
    fixture: Fixture,
    cursors: Mutex<Vec<usize>>,
    served: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(fixture: Fixture) -> ScriptedBackend {
        let slots = match &fixture {
            Fixture::RoundRobin { .. } => 1,
            Fixture::Substring { rules } => rules.len(),
        };
        ScriptedBackend {
            fixture,
            cursors: Mutex::new(vec![0; slots]),
            served: Mutex::new(0),
        }
    }

    /// Convenience constructor: one rule per (needle, reply) pair.
    pub fn by_substring(rules: &[(&str, &str)]) -> ScriptedBackend {
        ScriptedBackend::new(Fixture::Substring {
            rules: rules
                .iter()
                .map(|(contains, reply)| SubstringRule {
                    contains: contains.to_string(),
                    replies: vec![reply.to_string()],
                })
                .collect(),
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<ScriptedBackend, LlmError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| LlmError::Transport(format!("fixture file: {e}")))?;
        let fixture: Fixture = serde_json::from_str(&text)
            .map_err(|e| LlmError::Transport(format!("fixture schema: {e}")))?;
        Ok(ScriptedBackend::new(fixture))
    }

    pub fn calls_served(&self) -> usize {
        *self.served.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl TextBackend for ScriptedBackend {
    fn chat(&self, _system: &str, user: &str) -> Result<String, LlmError> {
        *self.served.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        let mut cursors = self.cursors.lock().unwrap_or_else(|e| e.into_inner());
        match &self.fixture {
            Fixture::RoundRobin {
                replies,
                on_exhausted,
            } => {
                let cursor = &mut cursors[0];
                if *cursor >= replies.len() {
                    match on_exhausted {
                        ExhaustPolicy::Wrap => *cursor = 0,
                        ExhaustPolicy::Error => {
                            return Err(LlmError::FixtureExhausted { served: *cursor })
                        }
                    }
                }
                let reply = replies[*cursor].clone();
                *cursor += 1;
                Ok(reply)
            }
            Fixture::Substring { rules } => {
                let idx = rules
                    .iter()
                    .position(|r| user.contains(&r.contains))
                    .ok_or(LlmError::NoFixtureMatch)?;
                let rule = &rules[idx];
                let cursor = &mut cursors[idx];
                let reply = rule.replies[*cursor % rule.replies.len()].clone();
                *cursor += 1;
                Ok(reply)
            }
        }
    }
}

/// A backend that fails every call; generation degrades to raw features.
pub struct FailingBackend;

impl TextBackend for FailingBackend {
    fn chat(&self, _system: &str, _user: &str) -> Result<String, LlmError> {
        Err(LlmError::Transport("backend unavailable".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_round_robin_serves_in_order() {
        let b = ScriptedBackend::new(Fixture::RoundRobin {
            replies: vec!["one".into(), "two".into()],
            on_exhausted: ExhaustPolicy::Wrap,
        });
        assert_eq!(b.chat("s", "u").unwrap(), "one");
        assert_eq!(b.chat("s", "u").unwrap(), "two");
        assert_eq!(b.chat("s", "u").unwrap(), "one"); // wrapped
    }

    #[test]
    fn scripted_round_robin_error_policy() {
        let b = ScriptedBackend::new(Fixture::RoundRobin {
            replies: vec!["only".into()],
            on_exhausted: ExhaustPolicy::Error,
        });
        assert!(b.chat("s", "u").is_ok());
        assert!(matches!(
            b.chat("s", "u"),
            Err(LlmError::FixtureExhausted { .. })
        ));
    }

    #[test]
    fn scripted_substring_dispatch() {
        let b = ScriptedBackend::by_substring(&[("JSON format", "{}"), ("grammar", "raw(0)")]);
        assert_eq!(b.chat("s", "reply in the JSON format now").unwrap(), "{}");
        assert_eq!(b.chat("s", "follow the grammar").unwrap(), "raw(0)");
        assert!(matches!(
            b.chat("s", "nothing matches"),
            Err(LlmError::NoFixtureMatch)
        ));
        assert_eq!(b.calls_served(), 3);
    }

    #[test]
    fn request_body_embeds_prompts_verbatim() {
        let params = BackendParams::default();
        let body = build_request_body(&params, "sys text", "user text");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][0]["content"], "sys text");
        assert_eq!(body["messages"][1]["content"], "user text");
        assert_eq!(body["temperature"], 1.0);
        assert_eq!(body["top_p"], 0.95);
        assert_eq!(body["model"], "gpt-4o");
    }

    #[test]
    fn missing_key_fails_before_any_network_call() {
        // Serialize env mutation with a lock-free approach: this test is
        // the only one touching these variables.
        std::env::remove_var(API_KEY_ENV);
        std::env::remove_var(API_KEY_ENV_FALLBACK);
        match HttpBackend::new(BackendParams::default()) {
            Err(LlmError::MissingApiKey) => {}
            Err(other) => panic!("expected MissingApiKey, got {other}"),
            Ok(_) => panic!("expected MissingApiKey, got a client"),
        }
    }

    #[test]
    fn retry_classification() {
        assert!(should_retry(&LlmError::Transport("x".into())));
        assert!(should_retry(&LlmError::Timeout));
        assert!(should_retry(&LlmError::BadRequest {
            status: 429,
            body: String::new()
        }));
        assert!(should_retry(&LlmError::BadRequest {
            status: 503,
            body: String::new()
        }));
        assert!(!should_retry(&LlmError::BadRequest {
            status: 400,
            body: String::new()
        }));
        assert!(!should_retry(&LlmError::Auth { status: 401 }));
    }

    #[test]
    fn in_flight_gate_bounds_concurrency() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::Arc;
        let gate = Arc::new(InFlightGate::new(2));
        let current = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let mut handles = Vec::new();
        for _ in 0..8 {
            let (gate, current, peak) = (gate.clone(), current.clone(), peak.clone());
            handles.push(std::thread::spawn(move || {
                gate.run(|| {
                    let now = current.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(10));
                    current.fetch_sub(1, Ordering::SeqCst);
                })
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
