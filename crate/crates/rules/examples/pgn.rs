//! Writes a game as PGN, reads it back and replays it.
//!
//! ```text
//! cargo run -p sanbench-rules --example pgn
//! ```

use sanbench_rules::pgn::PgnGame;
use sanbench_rules::{game_status, Board};

const GAME: &str = r#"[Event "Casual"]
[White "A"]
[Black "B"]
[Result "0-1"]

1. f3 e5 2. g4 Qh4# 0-1
"#;

fn main() {
    let game = PgnGame::parse(GAME).expect("valid PGN");
    println!("tags: {:?}", game.tags);
    println!("moves: {:?}, result {}", game.sans, game.result);
    let positions = game.replay().expect("legal moves");
    let (last, history): (&Board, &[Board]) = positions.split_last().unwrap();
    println!("final position {} is {:?}", last.to_fen(), game_status(last, history));
    print!("\n{}", game.to_pgn());
}
