//! Pulls the intended move out of free-form replies, first by scanning for
//! the last SAN-shaped token and then with an extractor session.
//!
//! ```text
//! cargo run -p sanbench --example extraction
//! ```

use sanbench::chat::{ChatSession, FaithfulExtractor, SamplingParams};
use sanbench::extract::{default_shots, extract_direct, extract_llm};

const REPLIES: [&str; 5] = [
    "Nf6",
    "I considered Nc6 but I'll go with d5.",
    "My move: Qxe5+!",
    "Castling seems safest: O-O.",
    "Good game so far, your move was strong.",
];

fn main() {
    let shots = default_shots();
    println!("{} extraction examples shipped\n", shots.len());
    for reply in REPLIES {
        let direct = extract_direct(reply);
        let mut new_session = || ChatSession::new(SamplingParams::default(), Box::new(FaithfulExtractor));
        let assisted = extract_llm(reply, &shots, &mut new_session).unwrap();
        println!("{reply:?}");
        println!("  tokens {:?}", direct.tokens);
        println!("  direct {:?}", direct.candidate);
        println!(
            "  assisted {:?} (extractor said {:?}, fallback {})",
            assisted.candidate,
            assisted.extractor_reply.unwrap_or_default(),
            assisted.fallback
        );
    }
}
