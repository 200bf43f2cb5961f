//! A scripted chat session: a reply, a regeneration, a reminder retry with
//! an injected opener, and history pruning.
//!
//! ```text
//! cargo run -p sanbench --example chat_session
//! ```

use sanbench::chat::{Annotation, ChatMessage, ChatSession, HistoryPolicy, SamplingParams, ScriptedAdapter};

fn main() {
    // one inner list per assistant turn; later entries answer regenerations
    let script = ScriptedAdapter::new(vec![
        vec!["e5".into()],
        vec!["b2".into(), "c3".into(), "the knight goes to c6, so Nc6".into()],
    ]);
    let mut session = ChatSession::new(SamplingParams::default(), Box::new(script)).unwrap();

    let first = session.complete(vec![ChatMessage::user("Let's play. 1. e4").tagged(Annotation::InitialPrompt)], None).unwrap();
    println!("reply: {first}");
    session.annotate_last_reply(Annotation::Reasoning, Some("e5".into()));

    let second = session.complete(vec![ChatMessage::user("Nf3").tagged(Annotation::MovePrompt)], None).unwrap();
    println!("reply: {second}");
    let regenerated = session.regenerate().unwrap();
    println!("regenerated: {regenerated}");
    let reminder = ChatMessage::user("Nf3 (moves b2, c3 are illegal)").tagged(Annotation::Reminder);
    let third = session.retry_with(vec![reminder], Some("Let's think step by step:")).unwrap();
    println!("after reminder: {third}");
    session.annotate_last_reply(Annotation::Reasoning, Some("Nc6".into()));

    println!("\nrejected replies: {:?}", session.rejected());
    session.prune(HistoryPolicy::KeepReasoning(1));
    println!("\ntranscript after keeping the last reasoning reply in full:");
    for m in session.transcript() {
        println!("  {:?}: {}", m.role, m.content);
    }
    println!("events: {:?}", session.events());
}
