use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sanbench_rules::{format_san, parse_san, Board, Color};
use serde::{Deserialize, Serialize};

use super::{Annotation, ChatAdapter, ChatError, ChatMessage, ChatRequest, Role};
use crate::engine::fake::search;
use crate::extract::san_tokens;

/// Scripted misbehaviour for a simulated player.
///
/// `plans[g % plans.len()]` drives game `g`. Entry `j` of a plan covers the
/// player's `j+1`-th move: each character is one bad attempt before a legal
/// one. `'a'..='h'` produce the impossible pawn push to that file's eighth
/// rank (`"a8"` ... `"h8"`), anything else produces prose without a move.
/// Ten or more characters exhaust the retry budget. Moves past the end of a
/// plan are legal at once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticProfile {
    pub plans: Vec<Vec<String>>,
    /// The legal reply is drawn from this many of the best moves.
    pub breadth: usize,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        SyntheticProfile { plans: Vec::new(), breadth: 3 }
    }
}

impl SyntheticProfile {
    /// A small population whose aggregate metrics are easy to work out by
    /// hand; see the acceptance tests.
    pub fn reference_population() -> Self {
        let plan = |entries: &[&str]| entries.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        SyntheticProfile {
            plans: vec![
                plan(&["", "a", "", "aab", "abcdefghaa"]),
                plan(&["b", "", "", "", "", "", "", "", "", "cc", "?abcdefghh"]),
                plan(&["", "", "ab", "", "dddddddddd"]),
                plan(&["?", "?", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "eeeeeeeeee"]),
            ],
            breadth: 3,
        }
    }
}

/// A seeded stand-in for a chat model playing black.
#[derive(Debug, Clone)]
pub struct SyntheticAdapter {
    profile: SyntheticProfile,
    game: usize,
    seed: u64,
}

impl SyntheticAdapter {
    pub fn new(profile: SyntheticProfile, game: usize, seed: u64) -> Self {
        SyntheticAdapter { profile, game, seed }
    }

    fn plan_entry(&self, slot: usize) -> &str {
        if self.profile.plans.is_empty() {
            return "";
        }
        let plan = &self.profile.plans[self.game % self.profile.plans.len()];
        plan.get(slot).map_or("", String::as_str)
    }

    fn pick(&self, board: &Board, slot: usize) -> Option<String> {
        let (ranked, _) = search(board, 1);
        if ranked.is_empty() {
            return None;
        }
        let width = self.profile.breadth.clamp(1, ranked.len());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (slot as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mv = ranked[rng.gen_range(0..width)].0;
        format_san(board, &mv).ok()
    }
}

fn apply_token(board: &Board, token: &str) -> Option<Board> {
    let m = parse_san(board, token).ok()?;
    board.apply(&m).ok()
}

/// Rebuilds the current position from the conversation. Returns the board
/// and the last move white announced.
fn reconstruct(messages: &[ChatMessage]) -> Option<(Board, Option<String>)> {
    let mut users = messages.iter().filter(|m| m.role != Role::System);
    let first = users.next()?;
    let mut board = Board::startpos();
    let mut last_white = None;
    if let Some(line) = first.content.lines().find(|l| l.trim_start().starts_with("1.")) {
        // a game given as movetext
        for tok in san_tokens(line) {
            if let Some(next) = apply_token(&board, &tok) {
                if board.turn() == Color::White {
                    last_white = Some(tok.clone());
                }
                board = next;
            }
        }
    } else {
        let opening = san_tokens(&first.content).pop()?;
        board = apply_token(&board, &opening)?;
        last_white = Some(opening);
    }
    for m in messages.iter().skip_while(|m| !std::ptr::eq(*m, first)).skip(1) {
        match (m.role, m.annotation) {
            (Role::User, Some(Annotation::Reminder)) | (Role::System, _) => {}
            (Role::User, _) => {
                let line = m.content.lines().next().unwrap_or("");
                if let Some(rest) = line.strip_prefix("Move: ") {
                    if let Some(tok) = san_tokens(rest).first() {
                        if board.turn() == Color::White {
                            if let Some(next) = apply_token(&board, tok) {
                                board = next;
                                last_white = Some(tok.clone());
                            }
                        }
                    }
                }
            }
            (Role::Assistant, _) => {
                if board.turn() == Color::Black {
                    if let Some(next) = san_tokens(&m.content).last().and_then(|t| apply_token(&board, t)) {
                        board = next;
                    }
                }
            }
        }
    }
    Some((board, last_white))
}

impl ChatAdapter for SyntheticAdapter {
    fn complete(&mut self, request: &ChatRequest<'_>) -> Result<String, ChatError> {
        let first = request.messages.iter().find(|m| m.role == Role::User).map_or("", |m| m.content.as_str());
        let verbose = first.contains("explain") || first.contains("analysis") || first.contains("best move");
        let entry: Vec<char> = self.plan_entry(request.slot).chars().collect();
        if let Some(&c) = entry.get(request.attempt) {
            return Ok(match c {
                'a'..='h' if verbose => format!("The pawn can advance, so I play {c}8."),
                'a'..='h' => format!("{c}8"),
                _ => "I need a moment to think about this position.".to_string(),
            });
        }
        let Some((board, last_white)) = reconstruct(request.messages) else {
            return Ok("I am not sure what the position is.".to_string());
        };
        let Some(choice) = self.pick(&board, request.slot) else {
            return Ok("There is nothing left to play.".to_string());
        };
        if !verbose {
            return Ok(choice);
        }
        let (ranked, _) = search(&board, 1);
        let alt = ranked.iter().filter_map(|(m, _)| format_san(&board, m).ok()).find(|s| *s != choice);
        let opener = match last_white {
            Some(w) => format!("You played {w}."),
            None => "It is my move.".to_string(),
        };
        Ok(match alt {
            Some(alt) => format!("{opener} I looked at {alt}, but the better option is {choice}."),
            None => format!("{opener} The only reasonable reply is {choice}."),
        })
    }
}
