use sanbench_rules::pgn::PgnGame;
use sanbench_rules::{parse_san, Board, Color};

use crate::chat::Role;
use crate::orchestrator::{GameRecord, Termination, TranscriptRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("game {game_id}: ply {ply} ({san}) does not replay")]
pub struct ReplayError {
    pub game_id: u64,
    pub ply: usize,
    pub san: String,
}

/// Replays the ply list; returns every position from the start onwards.
pub fn replay(record: &GameRecord) -> Result<Vec<Board>, ReplayError> {
    let mut boards = vec![Board::startpos()];
    for (i, ply) in record.plies.iter().enumerate() {
        let board = boards.last().expect("non-empty");
        let err = || ReplayError { game_id: record.game_id, ply: i + 1, san: ply.san.clone() };
        let m = parse_san(board, &ply.san).map_err(|_| err())?;
        let next = board.apply(&m).map_err(|_| err())?;
        boards.push(next);
    }
    Ok(boards)
}

/// PGN result token for a finished record.
pub fn result_token(record: &GameRecord, last: &Board) -> &'static str {
    match record.termination {
        Termination::Checkmate if last.turn() == Color::White => "0-1",
        Termination::Checkmate => "1-0",
        Termination::Stalemate
        | Termination::DrawFiftyMove
        | Termination::DrawThreefold
        | Termination::DrawInsufficientMaterial => "1/2-1/2",
        Termination::IllegalLimit | Termination::MoveCap | Termination::TransportFailure => "*",
    }
}

/// The engine plays white and the model black.
pub fn export_pgn(record: &GameRecord) -> Result<String, ReplayError> {
    let boards = replay(record)?;
    let result = result_token(record, boards.last().expect("non-empty"));
    let tag = |k: &str, v: String| (k.to_string(), v);
    let game = PgnGame {
        tags: vec![
            tag("Event", record.variation.to_string()),
            tag("Site", "?".into()),
            tag("Date", "????.??.??".into()),
            tag("Round", record.game_id.to_string()),
            tag("White", "engine".into()),
            tag("Black", "model".into()),
            tag("Result", result.into()),
            tag("Termination", record.termination.as_str().into()),
            tag("Seed", record.seed.to_string()),
        ],
        sans: record.sans(),
        result: result.to_string(),
    };
    Ok(game.to_pgn())
}

/// Plain-text transcript with each message's role and tag, followed by the
/// answers that regeneration discarded.
pub fn annotated_transcript(transcript: &TranscriptRecord) -> String {
    let mut out = String::new();
    for (i, m) in transcript.messages.iter().enumerate() {
        let role = match m.role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        let tag = m.annotation.map(|a| format!(" [{}]", serde_json::to_value(a).expect("tags serialize").as_str().unwrap_or("")));
        out.push_str(&format!("--- {} {role}{}\n", i + 1, tag.unwrap_or_default()));
        if let Some(p) = &m.injected_prefix {
            out.push_str(&format!("(continued from \"{p}\")\n"));
        }
        out.push_str(&m.content);
        out.push('\n');
    }
    if !transcript.rejected.is_empty() {
        out.push_str("--- discarded answers\n");
        for r in &transcript.rejected {
            out.push_str(&format!("* {r}\n"));
        }
    }
    out
}
