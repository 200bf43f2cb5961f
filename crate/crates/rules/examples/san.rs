//! Parses and prints standard algebraic notation, including the
//! disambiguation and check suffixes.
//!
//! ```text
//! cargo run -p sanbench-rules --example san -- e4 e5 Nf3 Nc6 Bb5 a6 Ba4 Nf6 O-O
//! ```

use sanbench_rules::{format_san, numbered_movetext, parse_san, Board};

fn main() {
    let input: Vec<String> = std::env::args().skip(1).collect();
    let moves = if input.is_empty() {
        "e4 e5 Nf3 Nc6 Bb5 a6 Ba4 Nf6 O-O Be7 Re1 b5 Bb3 d6 c3 O-O".split(' ').map(String::from).collect()
    } else {
        input
    };
    let mut board = Board::startpos();
    let mut played = Vec::new();
    for text in &moves {
        match parse_san(&board, text) {
            Ok(m) => {
                let san = format_san(&board, &m).unwrap();
                println!("{text:>8} -> {:<6} {san}", m.to_uci());
                board = board.apply(&m).unwrap();
                played.push(san);
            }
            Err(e) => {
                println!("{text:>8} rejected: {e}");
                break;
            }
        }
    }
    println!("\n{}", numbered_movetext(&played, true, 1));
    println!("{}", board.to_fen());

    // with both knights able to reach d7 the file is needed
    let b = Board::from_fen("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1").unwrap();
    let legal: Vec<String> = b.legal_moves().iter().filter(|m| m.to_uci().ends_with("d2")).map(|m| format_san(&b, m).unwrap()).collect();
    println!("\nmoves to d2 from {}: {legal:?}", b.to_fen());
}
