//! Counts leaf nodes of the legal move tree.
//!
//! ```text
//! cargo run --release -p sanbench-rules --example perft -- 5
//! cargo run --release -p sanbench-rules --example perft -- 4 "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1"
//! ```

use std::time::Instant;

use sanbench_rules::Board;

fn main() {
    let mut args = std::env::args().skip(1);
    let depth: u32 = args.next().map_or(4, |d| d.parse().expect("depth must be a number"));
    let board = match args.next() {
        Some(fen) => Board::from_fen(&fen).unwrap_or_else(|e| panic!("bad FEN: {e}")),
        None => Board::startpos(),
    };
    println!("{}", board.to_fen());
    let mut total = 0;
    let started = Instant::now();
    for (m, next) in board.successors() {
        let n = next.perft(depth.saturating_sub(1));
        println!("{}: {n}", m.to_uci());
        total += n;
    }
    let secs = started.elapsed().as_secs_f64();
    println!("\ndepth {depth}: {total} nodes in {secs:.2}s");
}
