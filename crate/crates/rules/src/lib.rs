//! Chess rules for the sanbench harness.
//!
//! Positions are plain `Copy` values; every operation is a pure function of
//! its inputs, so boards can be snapshotted and shared across threads freely.
//!
//! ```
//! use sanbench_rules::{Board, parse_san, format_san};
//!
//! let board = Board::startpos();
//! let m = parse_san(&board, "Nf3").unwrap();
//! assert_eq!(m.to_uci(), "g1f3");
//! let next = board.apply(&m).unwrap();
//! assert_eq!(format_san(&next, &parse_san(&next, "d5").unwrap()).unwrap(), "d5");
//! ```

mod board;
pub mod pgn;
mod san;
mod status;
mod types;

pub use board::{Board, FenError, IllegalMove, Move, STARTING_FEN};
pub use san::{format_san, is_san_shaped, numbered_movetext, parse_san, SanError, SanShape};
pub use status::{game_status, GameStatus};
pub use types::{CastleSide, CastlingRights, Color, ParseSquareError, Piece, Role, Square};
