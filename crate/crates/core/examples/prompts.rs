//! Renders the opening prompt, a move prompt and a reminder for every
//! shipped variation.
//!
//! ```text
//! cargo run -p sanbench --example prompts
//! cargo run -p sanbench --example prompts -- move-ilgrem
//! ```

use sanbench::prompts::{catalog, initial_prompt, move_prompt, reminder_prompt, variation_by_name, MoveContext};
use sanbench_rules::{parse_san, Board};

fn main() {
    let configs = match std::env::args().nth(1) {
        Some(name) => vec![variation_by_name(&name).unwrap_or_else(|e| panic!("{e}"))],
        None => catalog(),
    };
    let plies: Vec<String> = ["e4", "e5", "Nf3"].map(String::from).to_vec();
    let board = plies.iter().fold(Board::startpos(), |b, san| b.apply(&parse_san(&b, san).unwrap()).unwrap());
    for config in configs {
        println!("==== {} ({})", config.id, &config.config_hash()[..12]);
        println!("{}\n", initial_prompt(&config, "e4").unwrap());
        println!("-- move prompt");
        println!("{}\n", move_prompt(&config, MoveContext { san: "Nf3", plies: &plies, board: &board }).unwrap());
        let illegal = ["b2".to_string(), "Qxf7".to_string()];
        if let Some(text) = reminder_prompt(&config, "Nf3", &illegal).unwrap() {
            println!("-- reminder\n{text}\n");
        }
        if let Some(prefix) = &config.cot_prefix {
            println!("-- reply opener\n{prefix}\n");
        }
    }
}
