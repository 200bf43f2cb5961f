//! Move generator verification: node counts against the naive reference
//! implementation and against widely published perft tables.

use sanbench_oracle::OraclePosition;
use sanbench_rules::Board;

/// (FEN, [(depth, nodes)]) from the standard perft suites.
const PUBLISHED: &[(&str, &[(u32, u64)])] = &[
    (
        "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
        &[(1, 20), (2, 400), (3, 8_902), (4, 197_281), (5, 4_865_609)],
    ),
    // "Kiwipete": castling both sides, en passant, pins, promotions by capture
    (
        "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
        &[(1, 48), (2, 2_039), (3, 97_862)],
    ),
    // en passant discovered checks along the rank
    (
        "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
        &[(1, 14), (2, 191), (3, 2_812), (4, 43_238)],
    ),
    // promotions with mixed castling rights
    (
        "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
        &[(1, 6), (2, 264), (3, 9_467)],
    ),
    (
        "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
        &[(1, 44), (2, 1_486), (3, 62_379)],
    ),
];

#[test]
fn oracle_agrees_with_published_tables() {
    for (fen, table) in PUBLISHED {
        let pos = OraclePosition::from_fen(fen).unwrap();
        for &(depth, nodes) in table.iter().filter(|(d, _)| *d <= 3) {
            assert_eq!(pos.perft(depth), nodes, "oracle {fen} depth {depth}");
        }
    }
}

#[test]
fn start_position_depths_one_to_five() {
    let board = Board::startpos();
    let expected = PUBLISHED[0].1;
    for &(depth, nodes) in expected {
        assert_eq!(board.perft(depth), nodes, "depth {depth}");
    }
}

#[test]
fn published_positions_match() {
    for (fen, table) in &PUBLISHED[1..] {
        let board = Board::from_fen(fen).unwrap();
        for &(depth, nodes) in *table {
            assert_eq!(board.perft(depth), nodes, "{fen} depth {depth}");
        }
    }
}

#[test]
fn divide_matches_oracle() {
    // per-root-move subtree counts; a mismatch pinpoints the faulty move
    for (fen, _) in PUBLISHED {
        let board = Board::from_fen(fen).unwrap();
        let oracle = OraclePosition::from_fen(fen).unwrap();
        let mut ours: Vec<(String, u64)> = board
            .legal_moves()
            .iter()
            .map(|m| (m.to_uci(), board.apply(m).unwrap().perft(1)))
            .collect();
        ours.sort();
        let theirs: Vec<(String, u64)> = oracle
            .legal_moves()
            .iter()
            .map(|m| (m.clone(), oracle.make_uci(m).perft(1)))
            .collect();
        assert_eq!(ours, theirs, "{fen}");
    }
}

#[test]
fn depth_four_through_public_apply() {
    fn walk(b: &Board, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        b.legal_moves().iter().map(|m| walk(&b.apply(m).unwrap(), depth - 1)).sum()
    }
    assert_eq!(walk(&Board::startpos(), 4), 197_281);
}
