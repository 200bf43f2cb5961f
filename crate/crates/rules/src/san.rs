//! Standard Algebraic Notation.
//!
//! Parsing is split in two steps: [`SanShape::parse`] checks the grammar
//! without looking at a position, and [`parse_san`] resolves a shape against
//! the legal moves of a board. The split lets callers tell apart text that is
//! not a move at all from a well-formed move that is illegal or ambiguous.
//!
//! Accepted input, beyond strict SAN:
//! - trailing `+`, `#`, `!`, `?` in any combination, and a trailing `e.p.`
//! - `0-0` / `0-0-0` for castling
//! - promotion with or without `=` (`e8=Q`, `e8Q`)
//! - a capture marker on piece moves is not checked against the board
//!
//! Piece letters are case-sensitive: `nf3` is not a move, `bxc3` is a pawn
//! capture.

use std::fmt;

use crate::board::{Board, IllegalMove, Move};
use crate::types::{CastleSide, Role, Square};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SanError {
    #[error("{0:?} is not a SAN move")]
    NotAMove(String),
    #[error("{0:?} matches more than one legal move")]
    Ambiguous(String),
    #[error("{0:?} does not match any legal move")]
    Illegal(String),
}

/// The grammatical content of a SAN token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SanShape {
    Castle(CastleSide),
    Normal {
        role: Role,
        file: Option<u8>,
        rank: Option<u8>,
        capture: bool,
        to: Square,
        promotion: Option<Role>,
    },
}

fn strip_suffixes(text: &str) -> &str {
    let mut s = text.trim();
    loop {
        let before = s;
        s = s.trim_end_matches(['+', '#', '!', '?']);
        if let Some(rest) = s.strip_suffix("e.p.") {
            s = rest.trim_end();
        }
        if s == before {
            return s;
        }
    }
}

impl SanShape {
    pub fn parse(text: &str) -> Result<SanShape, SanError> {
        let not_a_move = || SanError::NotAMove(text.to_string());
        let s = strip_suffixes(text);
        match s {
            "O-O" | "0-0" => return Ok(SanShape::Castle(CastleSide::King)),
            "O-O-O" | "0-0-0" => return Ok(SanShape::Castle(CastleSide::Queen)),
            _ => {}
        }
        if !s.is_ascii() || s.len() < 2 {
            return Err(not_a_move());
        }
        let b = s.as_bytes();
        let is_file = |c: u8| (b'a'..=b'h').contains(&c);
        let is_rank = |c: u8| (b'1'..=b'8').contains(&c);

        if matches!(b[0], b'N' | b'B' | b'R' | b'Q' | b'K') {
            let role = Role::from_char(b[0] as char).unwrap();
            let body = &b[1..];
            if body.len() < 2 {
                return Err(not_a_move());
            }
            let (head, dest) = body.split_at(body.len() - 2);
            if !is_file(dest[0]) || !is_rank(dest[1]) {
                return Err(not_a_move());
            }
            let to = Square::from_coords(dest[0] - b'a', dest[1] - b'1').unwrap();
            let (head, capture) = match head.split_last() {
                Some((b'x', rest)) => (rest, true),
                _ => (head, false),
            };
            let (file, rank) = match head {
                [] => (None, None),
                [f] if is_file(*f) => (Some(f - b'a'), None),
                [r] if is_rank(*r) => (None, Some(r - b'1')),
                [f, r] if is_file(*f) && is_rank(*r) => (Some(f - b'a'), Some(r - b'1')),
                _ => return Err(not_a_move()),
            };
            return Ok(SanShape::Normal { role, file, rank, capture, to, promotion: None });
        }

        // pawn move: e4, exd5, e8=Q, exd8Q
        if !is_file(b[0]) {
            return Err(not_a_move());
        }
        let mut i = 0;
        let mut file = None;
        let mut capture = false;
        if b.len() >= 3 && b[1] == b'x' {
            file = Some(b[0] - b'a');
            capture = true;
            i = 2;
        }
        if b.len() < i + 2 || !is_file(b[i]) || !is_rank(b[i + 1]) {
            return Err(not_a_move());
        }
        let to = Square::from_coords(b[i] - b'a', b[i + 1] - b'1').unwrap();
        if capture && file == Some(to.file()) {
            return Err(not_a_move());
        }
        let rest = &b[i + 2..];
        let promo_letter = match rest {
            [] => None,
            [b'=', p] | [p] => Some(*p),
            _ => return Err(not_a_move()),
        };
        let promotion = match promo_letter {
            None => None,
            Some(p @ (b'N' | b'B' | b'R' | b'Q')) => Some(Role::from_char(p as char).unwrap()),
            Some(_) => return Err(not_a_move()),
        };
        if promotion.is_some() && to.rank() != 0 && to.rank() != 7 {
            return Err(not_a_move());
        }
        Ok(SanShape::Normal {
            role: Role::Pawn,
            file: Some(file.unwrap_or_else(|| to.file())),
            rank: None,
            capture,
            to,
            promotion,
        })
    }

    fn matches(&self, m: &Move) -> bool {
        match *self {
            SanShape::Castle(side) => m.castle == Some(side),
            SanShape::Normal { role, file, rank, to, promotion, .. } => {
                m.castle.is_none()
                    && m.role == role
                    && m.to == to
                    && m.promotion == promotion
                    && file.map_or(true, |f| m.from.file() == f)
                    && rank.map_or(true, |r| m.from.rank() == r)
            }
        }
    }
}

/// Whether `text` is grammatically a SAN move (legality not considered).
pub fn is_san_shaped(text: &str) -> bool {
    SanShape::parse(text).is_ok()
}

/// Resolves SAN text to the unique legal move it denotes on `board`.
pub fn parse_san(board: &Board, text: &str) -> Result<Move, SanError> {
    let shape = SanShape::parse(text)?;
    let mut found = board.legal_moves().into_iter().filter(|m| shape.matches(m));
    let first = found.next().ok_or_else(|| SanError::Illegal(text.to_string()))?;
    if found.next().is_some() {
        return Err(SanError::Ambiguous(text.to_string()));
    }
    Ok(first)
}

/// Minimal SAN for a legal move, with `+`/`#` suffixes.
pub fn format_san(board: &Board, m: &Move) -> Result<String, IllegalMove> {
    let legal = board.legal_moves();
    if !legal.contains(m) {
        return Err(IllegalMove { uci: m.to_uci(), fen: board.to_fen() });
    }
    let mut out = String::with_capacity(8);
    match (m.castle, m.role) {
        (Some(CastleSide::King), _) => out.push_str("O-O"),
        (Some(CastleSide::Queen), _) => out.push_str("O-O-O"),
        (None, Role::Pawn) => {
            if m.is_capture() {
                out.push(m.from.file_char());
                out.push('x');
            }
            out.push_str(&m.to.to_string());
            if let Some(p) = m.promotion {
                out.push('=');
                out.push(p.char());
            }
        }
        (None, role) => {
            out.push(role.char());
            let rivals: Vec<Square> = legal
                .iter()
                .filter(|o| o.role == role && o.to == m.to && o.from != m.from && o.castle.is_none())
                .map(|o| o.from)
                .collect();
            if !rivals.is_empty() {
                if rivals.iter().all(|r| r.file() != m.from.file()) {
                    out.push(m.from.file_char());
                } else if rivals.iter().all(|r| r.rank() != m.from.rank()) {
                    out.push(m.from.rank_char());
                } else {
                    out.push_str(&m.from.to_string());
                }
            }
            if m.is_capture() {
                out.push('x');
            }
            out.push_str(&m.to.to_string());
        }
    }
    let after = board.play_unchecked(m);
    if after.in_check() {
        out.push(if after.has_legal_move() { '+' } else { '#' });
    }
    Ok(out)
}

/// Numbered movetext (`1. e4 e5 2. Nf3`) for a SAN list starting from a
/// position with the given side to move and move number.
pub fn numbered_movetext(sans: &[String], white_first: bool, first_number: u32) -> String {
    let mut out = String::new();
    let mut number = first_number;
    let mut white = white_first;
    for (i, san) in sans.iter().enumerate() {
        if white {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{number}. {san}"));
        } else {
            if i == 0 {
                out.push_str(&format!("{number}... {san}"));
            } else {
                out.push(' ');
                out.push_str(san);
            }
            number += 1;
        }
        white = !white;
    }
    out
}

impl fmt::Display for SanShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SanShape::Castle(CastleSide::King) => f.write_str("O-O"),
            SanShape::Castle(CastleSide::Queen) => f.write_str("O-O-O"),
            SanShape::Normal { role, file, rank, capture, to, promotion } => {
                if role != Role::Pawn {
                    write!(f, "{}", role.char())?;
                    if let Some(fl) = file {
                        write!(f, "{}", (b'a' + fl) as char)?;
                    }
                } else if capture {
                    write!(f, "{}", (b'a' + file.unwrap_or(to.file())) as char)?;
                }
                if let Some(r) = rank {
                    write!(f, "{}", (b'1' + r) as char)?;
                }
                if capture {
                    f.write_str("x")?;
                }
                write!(f, "{to}")?;
                if let Some(p) = promotion {
                    write!(f, "={}", p.char())?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play(board: &Board, sans: &[&str]) -> Board {
        sans.iter().fold(*board, |b, s| b.apply(&parse_san(&b, s).unwrap()).unwrap())
    }

    #[test]
    fn knight_to_f3() {
        let b = Board::startpos();
        let m = parse_san(&b, "Nf3").unwrap();
        assert_eq!(m.to_uci(), "g1f3");
    }

    #[test]
    fn blocked_king_is_illegal() {
        assert_eq!(parse_san(&Board::startpos(), "Ke2"), Err(SanError::Illegal("Ke2".into())));
    }

    #[test]
    fn prose_is_not_a_move() {
        let b = Board::startpos();
        for t in ["hello", "", "nf3", "Nf", "e9", "Pe4x", "exe5", "e4=Q", "Zf3"] {
            assert!(matches!(parse_san(&b, t), Err(SanError::NotAMove(_))), "{t}");
        }
    }

    #[test]
    fn knight_disambiguation_by_file() {
        // knights on b1 and f3 both reach d2
        let b = Board::from_fen("4k3/8/8/8/8/5N2/8/1N2K3 w - - 0 1").unwrap();
        assert!(matches!(parse_san(&b, "Nd2"), Err(SanError::Ambiguous(_))));
        assert_eq!(parse_san(&b, "Nbd2").unwrap().from.to_string(), "b1");
        assert_eq!(parse_san(&b, "Nfd2").unwrap().from.to_string(), "f3");
        let m = parse_san(&b, "Nbd2").unwrap();
        assert_eq!(format_san(&b, &m).unwrap(), "Nbd2");
    }

    #[test]
    fn rooks_on_one_rank_get_file() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/R4RK1 w - - 0 1").unwrap();
        let m = b.parse_uci("a1d1").unwrap();
        assert_eq!(format_san(&b, &m).unwrap(), "Rad1");
        let b = Board::from_fen("R7/8/8/4k3/8/8/8/R5K1 w - - 0 1").unwrap();
        let m = b.parse_uci("a1a4").unwrap();
        assert_eq!(format_san(&b, &m).unwrap(), "R1a4");
    }

    #[test]
    fn castling_spellings() {
        let b = Board::from_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let short = parse_san(&b, "O-O").unwrap();
        assert_eq!(parse_san(&b, "0-0").unwrap(), short);
        assert_eq!(format_san(&b, &short).unwrap(), "O-O");
        let long = parse_san(&b, "0-0-0").unwrap();
        assert_eq!(format_san(&b, &long).unwrap(), "O-O-O");
    }

    #[test]
    fn tolerant_suffixes() {
        let b = Board::startpos();
        for t in ["e4+", "e4#", "e4!?", "e4!!", "e4?", " e4 "] {
            assert_eq!(parse_san(&b, t).unwrap().to_uci(), "e2e4", "{t}");
        }
        let ep = Board::from_fen("4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2").unwrap();
        assert!(parse_san(&ep, "exd6 e.p.").unwrap().en_passant);
        assert!(parse_san(&ep, "exd6e.p.").unwrap().en_passant);
    }

    #[test]
    fn promotion_forms() {
        let b = Board::from_fen("1r2k3/P7/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        assert_eq!(parse_san(&b, "a8=Q").unwrap().promotion, Some(Role::Queen));
        assert_eq!(parse_san(&b, "a8N").unwrap().promotion, Some(Role::Knight));
        assert_eq!(parse_san(&b, "axb8=R+").unwrap().to_uci(), "a7b8r");
        // a bare push to the last rank matches nothing
        assert!(matches!(parse_san(&b, "a8"), Err(SanError::Illegal(_))));
        let m = b.parse_uci("a7b8q").unwrap();
        assert_eq!(format_san(&b, &m).unwrap(), "axb8=Q+");
    }

    #[test]
    fn mate_suffix() {
        let b = play(&Board::startpos(), &["f3", "e5", "g4"]);
        let m = parse_san(&b, "Qh4").unwrap();
        assert_eq!(format_san(&b, &m).unwrap(), "Qh4#");
    }

    #[test]
    fn movetext_numbering() {
        let sans: Vec<String> = ["Nf3", "d5", "d4", "e6", "g3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(numbered_movetext(&sans, true, 1), "1. Nf3 d5 2. d4 e6 3. g3");
        assert_eq!(numbered_movetext(&sans[1..], false, 1), "1... d5 2. d4 e6 3. g3");
    }

    #[test]
    fn shape_display_round_trip() {
        for t in ["Nbd2", "R1a4", "Qh4xe1", "exd5", "e8=Q", "O-O", "O-O-O", "Kxe2"] {
            assert_eq!(SanShape::parse(t).unwrap().to_string(), t);
        }
    }
}
