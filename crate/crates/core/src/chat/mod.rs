//! Chat sessions over interchangeable model backends.
//!
//! A [`ChatSession`] owns the transcript and talks to one [`ChatAdapter`].
//! Backends: [`LiveAdapter`] (HTTP chat completions), [`ScriptedAdapter`]
//! (replays a JSONL script), [`SyntheticAdapter`] (a seeded simulated
//! player) and [`FaithfulExtractor`] (echoes the last SAN token it is shown).

mod live;
mod scripted;
mod synthetic;

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use live::{LiveAdapter, LiveConfig, RateLimiter};
pub use scripted::{FaithfulExtractor, FaultInjector, ScriptedAdapter};
pub use synthetic::{SyntheticAdapter, SyntheticProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// Tags that history policies key on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annotation {
    InitialPrompt,
    MovePrompt,
    Reasoning,
    Description,
    Reminder,
    ExtractionShot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Annotation>,
    /// Replacement text used when a history policy condenses this message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensed: Option<String>,
    /// Set on assistant messages whose opening text was injected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_prefix: Option<String>,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage { role, content: content.into(), annotation: None, condensed: None, injected_prefix: None }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }

    pub fn tagged(mut self, annotation: Annotation) -> Self {
        self.annotation = Some(annotation);
        self
    }

    pub fn with_condensed(mut self, text: impl Into<String>) -> Self {
        self.condensed = Some(text.into());
        self
    }
}

/// Which annotated messages survive in full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "n", rename_all = "kebab-case")]
pub enum HistoryPolicy {
    #[default]
    KeepAll,
    KeepReasoning(usize),
    KeepDescription(usize),
}

impl HistoryPolicy {
    pub fn validate(self) -> Result<(), ChatError> {
        match self {
            HistoryPolicy::KeepReasoning(0) | HistoryPolicy::KeepDescription(0) => {
                Err(ChatError::Config("history policy count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams { model: "gpt-3.5-turbo-0301".into(), temperature: 1.0, top_p: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Transport retries per request before giving up.
    pub max_retries: u32,
    /// First backoff; doubled on each retry.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 5, backoff_ms: 1_000 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ChatError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("content policy refusal: {0}")]
    ContentPolicy(String),
    #[error("script exhausted at slot {slot}, alternative {attempt}")]
    ScriptExhausted { slot: usize, attempt: usize },
    #[error("invalid chat configuration: {0}")]
    Config(String),
    #[error("transcript invariant violated: {0}")]
    Transcript(String),
}

impl ChatError {
    pub fn is_transient(&self) -> bool {
        matches!(self, ChatError::Transport(_))
    }
}

/// Everything an adapter sees for one call.
#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub messages: &'a [ChatMessage],
    pub params: &'a SamplingParams,
    /// Text the reply must continue from, for adapters that support it.
    pub prefix: Option<&'a str>,
    /// Number of assistant turns started so far in the session, 0-based.
    pub slot: usize,
    /// 0 for the first answer in a slot, then 1, 2, ... for regenerations
    /// and reminder retries.
    pub attempt: usize,
}

pub trait ChatAdapter: Send {
    /// Returns the reply text. When `request.prefix` is set and
    /// [`ChatAdapter::supports_prefix`] is true, the reply is the continuation
    /// only.
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError>;

    fn supports_prefix(&self) -> bool {
        true
    }
}

impl<A: ChatAdapter + ?Sized> ChatAdapter for Box<A> {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        (**self).complete(request)
    }
    fn supports_prefix(&self) -> bool {
        (**self).supports_prefix()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum SessionEvent {
    TransportRetry { slot: usize, attempt: usize, retry: u32, error: String },
    /// The adapter could not continue from a prefix, so it was appended to
    /// the last user message instead.
    PrefixFallback { slot: usize, prefix: String },
    Pruned { condensed: usize },
}

pub struct ChatSession {
    transcript: Vec<ChatMessage>,
    params: SamplingParams,
    retry: RetryPolicy,
    adapter: Box<dyn ChatAdapter>,
    rejected: Vec<String>,
    events: Vec<SessionEvent>,
    slot: Option<usize>,
    attempt: usize,
    last_retries: u32,
}

impl std::fmt::Debug for ChatSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatSession")
            .field("params", &self.params)
            .field("transcript", &self.transcript.len())
            .finish_non_exhaustive()
    }
}

impl ChatSession {
    pub fn new(params: SamplingParams, adapter: Box<dyn ChatAdapter>) -> Result<Self, ChatError> {
        if !(0.0..=2.0).contains(&params.temperature) {
            return Err(ChatError::Config(format!("temperature {} outside [0, 2]", params.temperature)));
        }
        if !(params.top_p > 0.0 && params.top_p <= 1.0) {
            return Err(ChatError::Config(format!("top_p {} outside (0, 1]", params.top_p)));
        }
        Ok(ChatSession {
            transcript: Vec::new(),
            params,
            retry: RetryPolicy::default(),
            adapter,
            rejected: Vec::new(),
            events: Vec::new(),
            slot: None,
            attempt: 0,
            last_retries: 0,
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn params(&self) -> &SamplingParams {
        &self.params
    }

    pub fn transcript(&self) -> &[ChatMessage] {
        &self.transcript
    }

    /// Responses discarded by [`ChatSession::regenerate`], oldest first.
    pub fn rejected(&self) -> &[String] {
        &self.rejected
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    /// Transport retries spent on the most recent call.
    pub fn last_retries(&self) -> u32 {
        self.last_retries
    }

    /// Last assistant message, if any.
    pub fn last_reply(&self) -> Option<&ChatMessage> {
        self.transcript.iter().rev().find(|m| m.role == Role::Assistant)
    }

    /// Annotates the newest assistant message.
    pub fn annotate_last_reply(&mut self, annotation: Annotation, condensed: Option<String>) {
        if let Some(m) = self.transcript.iter_mut().rev().find(|m| m.role == Role::Assistant) {
            m.annotation = Some(annotation);
            m.condensed = condensed;
        }
    }

    /// Appends `new_messages` and asks for a fresh assistant turn.
    pub fn complete(&mut self, new_messages: Vec<ChatMessage>, prefix: Option<&str>) -> Result<String, ChatError> {
        let slot = self.slot.map_or(0, |s| s + 1);
        self.slot = Some(slot);
        self.attempt = 0;
        self.append_and_ask(new_messages, prefix)
    }

    /// Replaces the last assistant message with a new sample for the same
    /// slot. The discarded text goes to the side log.
    pub fn regenerate(&mut self) -> Result<String, ChatError> {
        match self.transcript.last() {
            Some(m) if m.role == Role::Assistant => {}
            _ => return Err(ChatError::Transcript("regenerate needs a trailing assistant message".into())),
        }
        let old = self.transcript.pop().expect("checked above");
        self.attempt += 1;
        let prefix = old.injected_prefix.clone();
        match self.ask(prefix.as_deref()) {
            Ok(text) => {
                self.rejected.push(old.content);
                Ok(text)
            }
            Err(e) => {
                self.attempt -= 1;
                self.transcript.push(old);
                Err(e)
            }
        }
    }

    /// Keeps the previous answer in the transcript, appends `new_messages`
    /// (typically a reminder) and asks again within the same slot.
    pub fn retry_with(&mut self, new_messages: Vec<ChatMessage>, prefix: Option<&str>) -> Result<String, ChatError> {
        if self.slot.is_none() {
            return Err(ChatError::Transcript("retry_with before any completion".into()));
        }
        self.attempt += 1;
        self.append_and_ask(new_messages, prefix)
    }

    /// Condenses annotated messages beyond the newest `n` of the policy's tag.
    pub fn prune(&mut self, policy: HistoryPolicy) {
        let (tag, keep) = match policy {
            HistoryPolicy::KeepAll => return,
            HistoryPolicy::KeepReasoning(n) => (Annotation::Reasoning, n),
            HistoryPolicy::KeepDescription(n) => (Annotation::Description, n),
        };
        let tagged: Vec<usize> = (0..self.transcript.len())
            .filter(|&i| self.transcript[i].annotation == Some(tag))
            .collect();
        let mut condensed = 0;
        for &i in tagged.iter().rev().skip(keep) {
            let m = &mut self.transcript[i];
            if let Some(text) = m.condensed.take() {
                if !text.is_empty() {
                    m.content = text;
                    condensed += 1;
                }
            }
        }
        if condensed > 0 {
            self.events.push(SessionEvent::Pruned { condensed });
        }
    }

    fn append_and_ask(&mut self, new_messages: Vec<ChatMessage>, prefix: Option<&str>) -> Result<String, ChatError> {
        let before = self.transcript.len();
        self.transcript.extend(new_messages);
        if let Err(e) = check_roles(&self.transcript).and_then(|_| match self.transcript.last() {
            Some(m) if m.role == Role::User => Ok(()),
            _ => Err(ChatError::Transcript("the model must answer a user message".into())),
        }) {
            self.transcript.truncate(before);
            return Err(e);
        }
        let out = self.ask(prefix);
        if out.is_err() {
            self.transcript.truncate(before);
        }
        out
    }

    /// Calls the adapter with transport retries and appends the answer.
    fn ask(&mut self, prefix: Option<&str>) -> Result<String, ChatError> {
        let slot = self.slot.unwrap_or(0);
        let fallback = prefix.is_some() && !self.adapter.supports_prefix();
        let rewritten = match (fallback, prefix) {
            (true, Some(p)) => {
                let mut sent = self.transcript.clone();
                if let Some(last) = sent.last_mut() {
                    last.content = format!("{}\n\n{p}", last.content);
                }
                self.events.push(SessionEvent::PrefixFallback { slot, prefix: p.to_string() });
                Some(sent)
            }
            _ => None,
        };
        let messages = rewritten.as_deref().unwrap_or(&self.transcript);
        let request = ChatRequest {
            messages,
            params: &self.params,
            prefix: if fallback { None } else { prefix },
            slot,
            attempt: self.attempt,
        };
        self.last_retries = 0;
        let mut retry = 0;
        let reply = loop {
            match self.adapter.complete(&request) {
                Ok(text) => break text,
                Err(e) if e.is_transient() && retry < self.retry.max_retries => {
                    retry += 1;
                    self.events.push(SessionEvent::TransportRetry {
                        slot,
                        attempt: self.attempt,
                        retry,
                        error: e.to_string(),
                    });
                    let delay = self.retry.backoff_ms.saturating_mul(1 << (retry - 1).min(16));
                    if delay > 0 {
                        thread::sleep(Duration::from_millis(delay));
                    }
                }
                Err(e) => {
                    self.last_retries = retry;
                    return Err(e);
                }
            }
        };
        self.last_retries = retry;
        let content = match prefix {
            Some(p) if !fallback || !reply.trim_start().starts_with(p) => join_prefix(p, &reply),
            _ => reply,
        };
        let content = if content.trim().is_empty() { "(empty response)".to_string() } else { content };
        let mut message = ChatMessage::assistant(content.clone());
        message.injected_prefix = prefix.map(str::to_string);
        self.transcript.push(message);
        Ok(content)
    }
}

fn join_prefix(prefix: &str, continuation: &str) -> String {
    let rest = continuation.trim_start();
    if rest.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix} {rest}")
    }
}

/// Optional leading system message, then strict user/assistant
/// alternation starting with the user; no empty content.
pub fn check_roles(messages: &[ChatMessage]) -> Result<(), ChatError> {
    let mut expected = Role::User;
    for (i, m) in messages.iter().enumerate() {
        if m.content.is_empty() {
            return Err(ChatError::Transcript(format!("message {i} is empty")));
        }
        if m.role == Role::System {
            if i != 0 {
                return Err(ChatError::Transcript(format!("system message at position {i}")));
            }
            continue;
        }
        if m.role != expected {
            return Err(ChatError::Transcript(format!("message {i} should be {expected:?}, found {:?}", m.role)));
        }
        expected = if expected == Role::User { Role::Assistant } else { Role::User };
    }
    Ok(())
}
