use serde::{Deserialize, Serialize};

use crate::board::Board;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameStatus {
    Ongoing,
    Checkmate,
    Stalemate,
    DrawFiftyMove,
    DrawThreefold,
    DrawInsufficientMaterial,
}

impl GameStatus {
    pub fn is_terminal(self) -> bool {
        self != GameStatus::Ongoing
    }

    pub fn is_draw(self) -> bool {
        matches!(
            self,
            GameStatus::Stalemate
                | GameStatus::DrawFiftyMove
                | GameStatus::DrawThreefold
                | GameStatus::DrawInsufficientMaterial
        )
    }
}

/// Classifies `board`. `history` holds every position that occurred before
/// `board` in the game (oldest first, `board` itself excluded).
///
/// Threefold repetition and the fifty-move rule end the game immediately;
/// there is no claim step.
pub fn game_status(board: &Board, history: &[Board]) -> GameStatus {
    if !board.has_legal_move() {
        return if board.in_check() { GameStatus::Checkmate } else { GameStatus::Stalemate };
    }
    if board.is_insufficient_material() {
        return GameStatus::DrawInsufficientMaterial;
    }
    let key = board.repetition_key();
    // positions can only repeat since the last irreversible move
    let window = (board.halfmove_clock() as usize).min(history.len());
    let repeats = history[history.len() - window..]
        .iter()
        .filter(|b| b.turn() == board.turn() && b.repetition_key() == key)
        .count();
    if repeats + 1 >= 3 {
        return GameStatus::DrawThreefold;
    }
    if board.halfmove_clock() >= 100 {
        return GameStatus::DrawFiftyMove;
    }
    GameStatus::Ongoing
}
