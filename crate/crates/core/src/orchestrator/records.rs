use sanbench_rules::{parse_san, Board, Color, GameStatus, SanError};
use serde::{Deserialize, Serialize};

use crate::chat::{ChatMessage, SessionEvent};
use crate::engine::EvalScore;
use crate::extract::ExtractionMethod;
use crate::prompts::VariationId;

/// Version of the JSON Lines record layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Legal,
    Illegal,
    Ambiguous,
    NotAMove,
}

impl Verdict {
    /// Judges an extracted candidate on `board`.
    pub fn judge(board: &Board, candidate: Option<&str>) -> Verdict {
        match candidate.map(|c| parse_san(board, c)) {
            None => Verdict::NotAMove,
            Some(Ok(_)) => Verdict::Legal,
            Some(Err(SanError::Ambiguous(_))) => Verdict::Ambiguous,
            Some(Err(SanError::Illegal(_))) => Verdict::Illegal,
            Some(Err(SanError::NotAMove(_))) => Verdict::NotAMove,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub raw: String,
    pub extracted: Option<String>,
    pub verdict: Verdict,
    pub method: ExtractionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extractor_reply: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

/// How the chain-of-thought opener was handled for a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CotBranch {
    Injected,
    Emulated,
}

/// Every attempt the model made for one of its moves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveAttemptLog {
    /// 1-based, counting the model's moves only.
    pub index: u32,
    /// Position the model was asked to move in.
    pub fen: String,
    pub attempts: Vec<Attempt>,
    /// Canonical SAN of the accepted move.
    pub final_san: Option<String>,
    /// Non-legal attempts before the legal one (all of them if none was legal).
    pub r: u32,
    /// 1 if any attempt was not legal.
    pub p: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cot: Option<CotBranch>,
}

impl MoveAttemptLog {
    pub fn new(index: u32, fen: String) -> Self {
        MoveAttemptLog { index, fen, attempts: Vec::new(), final_san: None, r: 0, p: 0, cot: None }
    }

    /// Recomputes `r` and `p` from the attempts.
    pub fn settle(&mut self) {
        self.r = self.attempts.iter().filter(|a| a.verdict != Verdict::Legal).count() as u32;
        self.p = u8::from(self.r > 0 || self.final_san.is_none());
    }

    pub fn is_legal(&self) -> bool {
        self.final_san.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ply {
    pub san: String,
    pub mover: Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Checkmate,
    Stalemate,
    DrawFiftyMove,
    DrawThreefold,
    DrawInsufficientMaterial,
    IllegalLimit,
    MoveCap,
    TransportFailure,
}

impl Termination {
    pub fn from_status(status: GameStatus) -> Option<Termination> {
        Some(match status {
            GameStatus::Ongoing => return None,
            GameStatus::Checkmate => Termination::Checkmate,
            GameStatus::Stalemate => Termination::Stalemate,
            GameStatus::DrawFiftyMove => Termination::DrawFiftyMove,
            GameStatus::DrawThreefold => Termination::DrawThreefold,
            GameStatus::DrawInsufficientMaterial => Termination::DrawInsufficientMaterial,
        })
    }

    /// Ended by the rules of chess rather than by the harness.
    pub fn is_natural(self) -> bool {
        !matches!(self, Termination::IllegalLimit | Termination::MoveCap | Termination::TransportFailure)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Checkmate => "checkmate",
            Termination::Stalemate => "stalemate",
            Termination::DrawFiftyMove => "draw-fifty-move",
            Termination::DrawThreefold => "draw-threefold",
            Termination::DrawInsufficientMaterial => "draw-insufficient-material",
            Termination::IllegalLimit => "illegal-limit",
            Termination::MoveCap => "move-cap",
            Termination::TransportFailure => "transport-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub san: String,
    pub rank: u32,
    pub score: EvalScore,
}

/// The engine's options for one of its replies and the one sampled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineReply {
    /// 0-based index into the ply list.
    pub ply: usize,
    pub candidates: Vec<Candidate>,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema_version: u32,
    pub game_id: u64,
    pub variation: VariationId,
    pub config_hash: String,
    pub opening: String,
    pub seed: u64,
    pub plies: Vec<Ply>,
    pub attempts: Vec<MoveAttemptLog>,
    /// White-relative centipawns after each of the model's legal moves.
    pub evaluations: Vec<i32>,
    /// White-relative centipawns after every ply, aligned with `plies`.
    pub ply_evaluations: Vec<i32>,
    pub engine_replies: Vec<EngineReply>,
    pub termination: Termination,
    /// Count of model moves with a legal outcome.
    pub n_legal: u32,
    /// Key of this game's entry in the transcript log.
    pub transcript_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GameRecord {
    pub fn sans(&self) -> Vec<String> {
        self.plies.iter().map(|p| p.san.clone()).collect()
    }

    /// Whether metrics should consider this game.
    pub fn counts_for_metrics(&self) -> bool {
        self.termination != Termination::TransportFailure
    }
}

/// Full conversation of one game, stored apart from the record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub schema_version: u32,
    pub game_id: u64,
    pub messages: Vec<ChatMessage>,
    /// Answers replaced by regeneration, oldest first.
    pub rejected: Vec<String>,
    pub events: Vec<SessionEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub schema_version: u32,
    pub game_id: u64,
    /// Fraction drawn from [0.3, 0.7].
    pub fraction: f64,
    /// Plies kept; `round(fraction * original_plies)` moved by at most one
    /// so that black is to move.
    pub cut: usize,
    pub original_plies: usize,
    pub fen: String,
    pub prompt: String,
    pub response: String,
    pub suggestions: Vec<String>,
    /// The move black actually played next.
    pub next_move: String,
    pub engine_top: Vec<String>,
    pub alignment: bool,
    pub suggestions_valid: bool,
    /// Free text for manual annotation; not scored.
    pub insight: String,
}
