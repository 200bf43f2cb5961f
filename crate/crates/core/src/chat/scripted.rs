use std::collections::VecDeque;
use std::path::Path;

use super::{ChatAdapter, ChatError, ChatRequest, Role};
use crate::extract::san_tokens;

/// Replays a JSON Lines script. Line `i` is an array of alternative replies
/// for the `i`-th assistant turn; alternative `k` answers attempt `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedAdapter {
    slots: Vec<Vec<String>>,
}

impl ScriptedAdapter {
    pub fn new(slots: Vec<Vec<String>>) -> Self {
        ScriptedAdapter { slots }
    }

    pub fn from_jsonl(text: &str) -> Result<Self, ChatError> {
        let mut slots = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let alts: Vec<String> = serde_json::from_str(line)
                .map_err(|e| ChatError::Config(format!("script line {}: {e}", i + 1)))?;
            if alts.is_empty() || alts.iter().any(|a| a.is_empty()) {
                return Err(ChatError::Config(format!("script line {}: empty alternative", i + 1)));
            }
            slots.push(alts);
        }
        Ok(ScriptedAdapter { slots })
    }

    pub fn from_path(path: &Path) -> Result<Self, ChatError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChatError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }

    pub fn to_jsonl(&self) -> String {
        self.slots.iter().map(|s| serde_json::to_string(s).expect("strings serialize") + "\n").collect()
    }

    pub fn slots(&self) -> &[Vec<String>] {
        &self.slots
    }
}

impl ChatAdapter for ScriptedAdapter {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        self.slots
            .get(request.slot)
            .and_then(|alts| alts.get(request.attempt))
            .cloned()
            .ok_or(ChatError::ScriptExhausted { slot: request.slot, attempt: request.attempt })
    }
}

/// Fails with the queued errors first, then delegates.
#[derive(Debug)]
pub struct FaultInjector<A> {
    inner: A,
    faults: VecDeque<ChatError>,
}

impl<A> FaultInjector<A> {
    pub fn new(inner: A, faults: Vec<ChatError>) -> Self {
        FaultInjector { inner, faults: faults.into() }
    }
}

impl<A: ChatAdapter> ChatAdapter for FaultInjector<A> {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        match self.faults.pop_front() {
            Some(e) => Err(e),
            None => self.inner.complete(request),
        }
    }

    fn supports_prefix(&self) -> bool {
        self.inner.supports_prefix()
    }
}

/// An extractor backend that answers with the last SAN-shaped token of the
/// last user message, or "none".
#[derive(Debug, Clone, Copy, Default)]
pub struct FaithfulExtractor;

impl ChatAdapter for FaithfulExtractor {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        let last = request.messages.iter().rev().find(|m| m.role == Role::User);
        Ok(last.and_then(|m| san_tokens(&m.content).pop()).unwrap_or_else(|| "none".to_string()))
    }
}
