//! Prints the plain-English board description sent with board-describing
//! variations.
//!
//! ```text
//! cargo run -p sanbench --example describe_board
//! cargo run -p sanbench --example describe_board -- "r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3"
//! ```

use sanbench::prompts::describe_board;
use sanbench_rules::{parse_san, Board};

fn main() {
    let board = match std::env::args().nth(1) {
        Some(fen) => Board::from_fen(&fen).unwrap_or_else(|e| panic!("bad FEN: {e}")),
        None => ["e4", "e5", "Nf3", "Nc6", "Bc4"].iter().fold(Board::startpos(), |b, san| {
            b.apply(&parse_san(&b, san).unwrap()).unwrap()
        }),
    };
    println!("{}\n", board.to_fen());
    println!("{}", describe_board(&board));
}
