use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatAdapter, ChatError, ChatRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveConfig {
    /// Full URL of an OpenAI-style `chat/completions` endpoint.
    pub endpoint: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_ms: u64,
    /// Minimum spacing between requests across all sessions.
    pub min_interval_ms: u64,
    /// Whether the backend continues a trailing assistant message.
    pub supports_prefix: bool,
    /// Raw request/response log (JSON Lines).
    pub log_path: Option<PathBuf>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_ms: 120_000,
            min_interval_ms: 0,
            supports_prefix: false,
            log_path: None,
        }
    }
}

/// Spaces out requests; shared by every session of a run.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter { interval: min_interval, last: Mutex::new(None) }
    }

    /// Blocks until a request may be sent.
    pub fn acquire(&self) {
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(prev) = *last {
            let ready = prev + self.interval;
            let now = Instant::now();
            if ready > now {
                thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }
}

#[derive(Clone)]
pub struct LiveAdapter {
    agent: ureq::Agent,
    config: LiveConfig,
    key: Option<String>,
    limiter: Arc<RateLimiter>,
    log: Option<Arc<Mutex<File>>>,
}

impl std::fmt::Debug for LiveAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiveAdapter").field("endpoint", &self.config.endpoint).finish_non_exhaustive()
    }
}

impl LiveAdapter {
    /// Reads the key from the environment and opens the log. Clones share
    /// the limiter and the log file.
    pub fn new(config: LiveConfig) -> Result<Self, ChatError> {
        let key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        if key.is_none() && config.endpoint.starts_with("https://api.openai.com") {
            return Err(ChatError::Config(format!("environment variable {} is not set", config.api_key_env)));
        }
        let log = match &config.log_path {
            Some(path) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| ChatError::Config(format!("opening {}: {e}", path.display())))?;
                Some(Arc::new(Mutex::new(file)))
            }
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        let limiter = Arc::new(RateLimiter::new(Duration::from_millis(config.min_interval_ms)));
        Ok(LiveAdapter { agent, config, key, limiter, log })
    }

    pub fn request_body(&self, request: &ChatRequest<'_>) -> Value {
        let mut messages: Vec<Value> =
            request.messages.iter().map(|m| json!({ "role": m.role, "content": m.content })).collect();
        if let (true, Some(prefix)) = (self.config.supports_prefix, request.prefix) {
            messages.push(json!({ "role": "assistant", "content": prefix }));
        }
        json!({
            "model": request.params.model,
            "messages": messages,
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
        })
    }

    fn log(&self, entry: &Value) -> Result<(), ChatError> {
        if let Some(log) = &self.log {
            let mut file = log.lock().unwrap_or_else(|e| e.into_inner());
            writeln!(file, "{entry}").and_then(|_| file.flush()).map_err(|e| ChatError::Transport(format!("session log: {e}")))?;
        }
        Ok(())
    }
}

fn classify(status: u16, body: &str) -> Result<String, ChatError> {
    let parsed: Option<Value> = serde_json::from_str(body).ok();
    let error_code = parsed
        .as_ref()
        .and_then(|v| v.pointer("/error/code").or_else(|| v.pointer("/error/type")))
        .and_then(Value::as_str)
        .unwrap_or("");
    if status == 429 || status >= 500 {
        return Err(ChatError::Transport(format!("http {status}")));
    }
    if error_code.contains("content_policy") || error_code.contains("content_filter") {
        return Err(ChatError::ContentPolicy(body.to_string()));
    }
    if status >= 400 {
        return Err(ChatError::Config(format!("http {status}: {body}")));
    }
    let v = parsed.ok_or_else(|| ChatError::Transport("response is not JSON".into()))?;
    let choice = v.pointer("/choices/0").ok_or_else(|| ChatError::Transport("response has no choices".into()))?;
    if choice.get("finish_reason").and_then(Value::as_str) == Some("content_filter") {
        return Err(ChatError::ContentPolicy("finish_reason content_filter".into()));
    }
    choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ChatError::Transport("choice has no message content".into()))
}

impl ChatAdapter for LiveAdapter {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        let body = self.request_body(request);
        self.limiter.acquire();
        let mut call = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let (status, text) = match call.send_json(&body) {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                match resp.body_mut().read_to_string() {
                    Ok(text) => (status, text),
                    Err(e) => {
                        self.log(&json!({ "request": body, "error": e.to_string() }))?;
                        return Err(ChatError::Transport(e.to_string()));
                    }
                }
            }
            Err(e) => {
                self.log(&json!({ "request": body, "error": e.to_string() }))?;
                return Err(ChatError::Transport(e.to_string()));
            }
        };
        self.log(&json!({ "request": body, "status": status, "response": text }))?;
        classify(status, &text)
    }

    fn supports_prefix(&self) -> bool {
        self.config.supports_prefix
    }
}
