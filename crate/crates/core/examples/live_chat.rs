//! Sends one move prompt to an OpenAI-compatible chat completions endpoint.
//! The key is read from the variable named by `api_key_env`.
//!
//! ```text
//! OPENAI_API_KEY=... cargo run -p sanbench --example live_chat
//! cargo run -p sanbench --example live_chat -- http://localhost:8080/v1/chat/completions local-model
//! ```

use sanbench::chat::{ChatMessage, ChatSession, LiveAdapter, LiveConfig, SamplingParams};
use sanbench::prompts::{initial_message, variation, VariationId};

fn main() {
    let mut args = std::env::args().skip(1);
    let mut config = LiveConfig::default();
    if let Some(endpoint) = args.next() {
        config.endpoint = endpoint;
    }
    let mut params = SamplingParams::default();
    if let Some(model) = args.next() {
        params.model = model;
    }
    let adapter = match LiveAdapter::new(config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("cannot set up the endpoint: {e}");
            std::process::exit(2);
        }
    };
    let mut session = ChatSession::new(params, Box::new(adapter)).unwrap();
    let opening = initial_message(&variation(VariationId::Baseline), "e4").unwrap();
    match session.complete(vec![opening], None) {
        Ok(reply) => println!("model: {reply}"),
        Err(e) => eprintln!("request failed: {e}"),
    }
    match session.complete(vec![ChatMessage::user("Nf3")], None) {
        Ok(reply) => println!("model: {reply}"),
        Err(e) => eprintln!("request failed: {e}"),
    }
}
