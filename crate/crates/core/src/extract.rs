//! Pulls the intended SAN move out of free-text model replies.
//!
//! Token grammar (checked without a board):
//!
//! ```text
//! castle  = "O-O" | "O-O-O" | "0-0" | "0-0-0"
//! piece   = [KQRBN] [a-h]? [1-8]? "x"? [a-h][1-8]
//! pawn    = ([a-h] "x")? [a-h][1-8] ("="? [QRBN])?
//! token   = (castle | piece | pawn) [+#]?
//! ```
//!
//! A token must not touch a letter or digit on either side, so `1.e4`
//! yields `e4` while `be4` and `e4s` yield nothing.

use std::sync::OnceLock;

use regex::Regex;
use sanbench_rules::is_san_shaped;
use serde::{Deserialize, Serialize};

use crate::chat::{Annotation, ChatError, ChatMessage, ChatSession};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionMethod {
    Direct,
    LlmAssisted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub candidate: Option<String>,
    pub method: ExtractionMethod,
    pub raw: String,
    /// Every SAN-shaped token in `raw`, in order.
    pub tokens: Vec<String>,
    /// What the extractor model answered, when one was asked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extractor_reply: Option<String>,
    /// True when the extractor's answer failed the grammar and the direct
    /// scan was used instead.
    #[serde(default)]
    pub fallback: bool,
}

/// One example pair for the extraction prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    pub input: String,
    pub output: String,
}

pub const EXTRACTION_INSTRUCTION: &str = "You will be shown a chess player's message. Reply with only the final move \
the player decided to make, written in Standard Algebraic Notation, and nothing else.";

const SHOTS_JSON: &str = include_str!("../assets/extraction_shots.json");

/// The shipped eight example pairs.
pub fn default_shots() -> Vec<Shot> {
    serde_json::from_str(SHOTS_JSON).expect("bundled shots are valid JSON")
}

pub fn shots_fixture_text() -> &'static str {
    SHOTS_JSON
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"(?:O-O-O|O-O|0-0-0|0-0",
            r"|[KQRBN][a-h]?[1-8]?x?[a-h][1-8]",
            r"|(?:[a-h]x)?[a-h][1-8](?:=?[QRBN])?)",
            r"[+#]?"
        ))
        .expect("valid regex")
    })
}

fn is_word(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// All SAN-shaped tokens in `text`, in order of appearance.
pub fn san_tokens(text: &str) -> Vec<String> {
    let re = token_regex();
    let mut out = Vec::new();
    let mut at = 0;
    while let Some(m) = re.find_at(text, at) {
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        // "O-O" inside "O-O-O" is handled by alternation order; a hyphen
        // after a castle means a longer, malformed castle
        let castle_tail = m.as_str().starts_with(['O', '0']) && after == Some('-');
        if !is_word(before) && !is_word(after) && !castle_tail {
            out.push(m.as_str().to_string());
            at = m.end();
        } else {
            at = m.start() + text[m.start()..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

/// The last SAN-shaped token is the candidate.
pub fn extract_direct(response: &str) -> ExtractionResult {
    let tokens = san_tokens(response);
    ExtractionResult {
        candidate: tokens.last().cloned(),
        method: ExtractionMethod::Direct,
        raw: response.to_string(),
        tokens,
        extractor_reply: None,
        fallback: false,
    }
}

/// The messages sent to an extractor: an instruction, the example pairs,
/// then the response to read.
pub fn extraction_messages(shots: &[Shot], response: &str) -> Vec<ChatMessage> {
    let mut messages = vec![ChatMessage::system(EXTRACTION_INSTRUCTION)];
    for shot in shots {
        messages.push(ChatMessage::user(shot.input.clone()).tagged(Annotation::ExtractionShot));
        messages.push(ChatMessage::assistant(shot.output.clone()).tagged(Annotation::ExtractionShot));
    }
    messages.push(ChatMessage::user(response.to_string()));
    messages
}

/// Asks a fresh extractor session for the final move. A reply that is not
/// one SAN token falls back to [`extract_direct`].
pub fn extract_llm(
    response: &str,
    shots: &[Shot],
    new_session: &mut dyn FnMut() -> Result<ChatSession, ChatError>,
) -> Result<ExtractionResult, ChatError> {
    let mut session = new_session()?;
    let reply = session.complete(extraction_messages(shots, response), None)?;
    let cleaned = reply.trim().trim_end_matches(['.', '!', '?']).trim_matches(['"', '\'', '`', '*']);
    let mut result = extract_direct(response);
    result.extractor_reply = Some(reply.clone());
    if is_san_shaped(cleaned) && san_tokens(cleaned).len() == 1 {
        result.candidate = Some(cleaned.to_string());
        result.method = ExtractionMethod::LlmAssisted;
    } else {
        result.fallback = true;
    }
    Ok(result)
}
