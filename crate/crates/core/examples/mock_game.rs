//! Plays one game against a simulated player and prints the record, the
//! PGN and the audit result.
//!
//! ```text
//! cargo run -p sanbench --example mock_game
//! cargo run -p sanbench --example mock_game -- rsn-cot 42
//! ```

use sanbench::chat::SyntheticProfile;
use sanbench::engine::fake::FakeEngine;
use sanbench::orchestrator::{audit, play_game, GameSettings, MockChat, MockFactory};
use sanbench::prompts::variation_by_name;
use sanbench::report::{annotated_transcript, export_pgn};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = variation_by_name(&args.next().unwrap_or_else(|| "baseline".into())).unwrap_or_else(|e| panic!("{e}"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed must be a number"));
    let chat = MockFactory::new(MockChat::Synthetic(SyntheticProfile::reference_population()));
    let (record, transcript) = play_game(&config, 0, seed, &mut FakeEngine::default(), &chat, GameSettings::default());

    println!("{}", export_pgn(&record).unwrap());
    println!("termination: {:?}, {} legal model moves", record.termination, record.n_legal);
    for log in &record.attempts {
        let tried: Vec<String> = log.attempts.iter().map(|a| a.extracted.clone().unwrap_or_else(|| "-".into())).collect();
        println!("  move {:>2}: tried {:?} (r = {}, p = {})", log.index, tried, log.r, log.p);
    }
    let issues = audit(&record);
    println!("audit: {} issues", issues.len());
    if std::env::var_os("SHOW_TRANSCRIPT").is_some() {
        println!("\n{}", annotated_transcript(&transcript));
    }
}
