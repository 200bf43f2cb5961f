//! Minimal PGN: one game per text, tag pairs plus SAN movetext.

use crate::board::Board;
use crate::san::{numbered_movetext, parse_san, SanError};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PgnGame {
    pub tags: Vec<(String, String)>,
    pub sans: Vec<String>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgnError {
    #[error("malformed tag line: {0}")]
    Tag(String),
    #[error("move {index} ({san}) does not replay: {source}")]
    Replay {
        index: usize,
        san: String,
        #[source]
        source: SanError,
    },
    #[error("unterminated comment")]
    Comment,
}

const RESULTS: [&str; 4] = ["1-0", "0-1", "1/2-1/2", "*"];

impl PgnGame {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    /// Renders the game; movetext is wrapped at 80 columns.
    pub fn to_pgn(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.tags {
            let escaped = v.replace('\\', "\\\\").replace('"', "\\\"");
            out.push_str(&format!("[{k} \"{escaped}\"]\n"));
        }
        out.push('\n');
        let mut text = numbered_movetext(&self.sans, true, 1);
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&self.result);
        let mut line = String::new();
        for word in text.split(' ') {
            if !line.is_empty() && line.len() + 1 + word.len() > 80 {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        out.push_str(&line);
        out.push('\n');
        out
    }

    /// Parses tags and movetext. Move numbers, comments, NAGs and
    /// variations are skipped. Moves are not validated; see [`PgnGame::replay`].
    pub fn parse(text: &str) -> Result<PgnGame, PgnError> {
        let mut game = PgnGame { result: "*".into(), ..Default::default() };
        let mut movetext = String::new();
        for line in text.lines() {
            let t = line.trim();
            if t.starts_with('[') {
                let inner = t.trim_start_matches('[').trim_end_matches(']');
                let (key, rest) = inner.split_once(' ').ok_or_else(|| PgnError::Tag(t.into()))?;
                let value = rest.trim();
                if !(value.starts_with('"') && value.ends_with('"') && value.len() >= 2) {
                    return Err(PgnError::Tag(t.into()));
                }
                let value = value[1..value.len() - 1].replace("\\\"", "\"").replace("\\\\", "\\");
                game.tags.push((key.to_string(), value));
            } else {
                movetext.push_str(t);
                movetext.push(' ');
            }
        }
        let mut cleaned = String::new();
        let mut depth = 0usize;
        let mut in_comment = false;
        for c in movetext.chars() {
            match c {
                '{' if !in_comment => in_comment = true,
                '}' if in_comment => in_comment = false,
                '(' if !in_comment => depth += 1,
                ')' if !in_comment && depth > 0 => depth -= 1,
                _ if in_comment || depth > 0 => {}
                _ => cleaned.push(c),
            }
        }
        if in_comment {
            return Err(PgnError::Comment);
        }
        for token in cleaned.split_whitespace() {
            if RESULTS.contains(&token) {
                game.result = token.to_string();
                continue;
            }
            if token.starts_with('$') {
                continue;
            }
            // strip "12." / "12..." prefixes, possibly glued to the move
            let stripped = token.trim_start_matches(|c: char| c.is_ascii_digit()).trim_start_matches('.');
            if stripped.is_empty() || stripped.len() == token.len() && token.chars().all(|c| c.is_ascii_digit()) {
                continue;
            }
            let san = if token.chars().next().is_some_and(|c| c.is_ascii_digit()) && token.contains('.') {
                stripped
            } else {
                token
            };
            game.sans.push(san.to_string());
        }
        Ok(game)
    }

    /// Replays the movetext from the standard start, returning every
    /// position (start included).
    pub fn replay(&self) -> Result<Vec<Board>, PgnError> {
        let mut positions = vec![Board::startpos()];
        for (index, san) in self.sans.iter().enumerate() {
            let b = *positions.last().unwrap();
            let m = parse_san(&b, san).map_err(|source| PgnError::Replay { index, san: san.clone(), source })?;
            positions.push(b.apply(&m).expect("parse_san returns legal moves"));
        }
        Ok(positions)
    }
}
