//! Scripted end-to-end games: loop behaviour and the exact prompt bytes.

mod common;

#[test]
fn scripted_games_follow_the_protocol() {
    let problems = common::protocol_problems();
    assert!(problems.is_empty(), "{problems:#?}");
}
