//! Ranks moves with a UCI engine, or with the built-in search when no
//! engine path is given.
//!
//! ```text
//! cargo run -p sanbench --example uci_engine
//! cargo run -p sanbench --example uci_engine -- /usr/bin/stockfish
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sanbench::engine::fake::FakeEngine;
use sanbench::engine::{sample_reply, Engine, EngineConfig, SearchLimit, UciEngine};
use sanbench_rules::{format_san, parse_san, Board};

fn main() {
    let mut engine: Box<dyn Engine> = match std::env::args().nth(1) {
        Some(path) => {
            let config = EngineConfig { path: path.into(), limit: SearchLimit::Depth(12), ..EngineConfig::default() };
            let uci = UciEngine::start(config).unwrap_or_else(|e| panic!("{e}"));
            println!("engine: {}", uci.name().unwrap_or("unnamed"));
            Box::new(uci)
        }
        None => {
            println!("engine: built-in search");
            Box::new(FakeEngine::default())
        }
    };
    engine.new_game().unwrap();
    let board = ["e4", "e5", "Nf3", "Nc6", "Bc4", "Nd4"]
        .iter()
        .fold(Board::startpos(), |b, san| b.apply(&parse_san(&b, san).unwrap()).unwrap());
    println!("{}", board.to_fen());
    for r in engine.top_moves(&board, 3).unwrap() {
        println!("  {}. {} {:?}", r.rank, format_san(&board, &r.mv).unwrap(), r.score);
    }
    println!("evaluation: {} cp for white", engine.evaluate(&board).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (reply, _) = sample_reply(engine.as_mut(), &board, &mut rng).unwrap();
    println!("sampled reply: {}", format_san(&board, &reply).unwrap());

    let mated = Board::from_fen("rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3").unwrap();
    println!("after fool's mate: {} cp", engine.evaluate(&mated).unwrap());
}
