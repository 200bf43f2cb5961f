//! Every relation stated by the board describer, and every relation it
//! should have stated, checked against the naive reference board.

mod common;

use sanbench::prompts::describe_board;
use sanbench_rules::Board;

#[test]
fn random_positions_have_no_discrepancies() {
    let mut problems = Vec::new();
    let mut relations = 0usize;
    for b in common::random_boards(500, 0xBEEF, 160) {
        let (p, n) = common::describe_discrepancies(&b);
        problems.extend(p);
        relations += n;
    }
    assert!(relations > 5_000);
    assert!(problems.is_empty(), "{} discrepancies, first: {:?}", problems.len(), &problems[..problems.len().min(5)]);
}

#[test]
fn en_passant_is_flagged_only_when_capturable() {
    let flagged = Board::from_fen("rnbqkbnr/ppp1p1pp/8/3pPp2/8/8/PPPP1PPP/RNBQKBNR w KQkq f6 0 3").unwrap();
    assert!(common::describe_discrepancies(&flagged).0.is_empty());
    let text = describe_board(&flagged);
    assert!(text.contains("A pawn is on f5") && text.contains("can be captured en passant on f6."));
    // the square is set but nothing can take
    let quiet = Board::from_fen("rnbqkbnr/ppppp1pp/8/5p2/8/8/PPPPPPPP/RNBQKBNR w KQkq f6 0 2").unwrap();
    assert!(common::describe_discrepancies(&quiet).0.is_empty());
    assert!(!describe_board(&quiet).contains("en passant"));
}
