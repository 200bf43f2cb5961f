//! A deliberately naive chess reference implementation.
//!
//! Nothing here shares code or representation with `sanbench-rules`: the board
//! is an 8x8 grid of FEN characters, moves are UCI strings, and every question
//! (is the king attacked? who attacks this square?) is answered by scanning the
//! whole board. It is slow on purpose and only used from tests.

use std::fmt::Write as _;

/// (file, rank), both 0..8.
pub type Coord = (i32, i32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OraclePosition {
    grid: [[char; 8]; 8], // grid[rank][file]
    white_to_move: bool,
    castling: String,
    ep: Option<Coord>,
    halfmove: u32,
    fullmove: u32,
}

const KNIGHT: [Coord; 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING: [Coord; 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DIRS: [Coord; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [Coord; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn coord_name((f, r): Coord) -> String {
    format!("{}{}", (b'a' + f as u8) as char, r + 1)
}

pub fn parse_coord(s: &str) -> Option<Coord> {
    let b = s.as_bytes();
    if b.len() != 2 || !(b'a'..=b'h').contains(&b[0]) || !(b'1'..=b'8').contains(&b[1]) {
        return None;
    }
    Some(((b[0] - b'a') as i32, (b[1] - b'1') as i32))
}

fn on_board((f, r): Coord) -> bool {
    (0..8).contains(&f) && (0..8).contains(&r)
}

fn is_white(c: char) -> bool {
    c.is_ascii_uppercase()
}

impl OraclePosition {
    pub fn startpos() -> Self {
        Self::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap()
    }

    pub fn from_fen(fen: &str) -> Option<Self> {
        let parts: Vec<&str> = fen.split_whitespace().collect();
        if parts.len() < 4 {
            return None;
        }
        let mut grid = [['.'; 8]; 8];
        let rows: Vec<&str> = parts[0].split('/').collect();
        if rows.len() != 8 {
            return None;
        }
        for (i, row) in rows.iter().enumerate() {
            let rank = 7 - i;
            let mut file = 0usize;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as usize;
                } else {
                    if file >= 8 {
                        return None;
                    }
                    grid[rank][file] = c;
                    file += 1;
                }
            }
            if file != 8 {
                return None;
            }
        }
        let castling = if parts[2] == "-" { String::new() } else { parts[2].to_string() };
        let ep = if parts[3] == "-" { None } else { Some(parse_coord(parts[3])?) };
        Some(Self {
            grid,
            white_to_move: parts[1] == "w",
            castling,
            ep,
            halfmove: parts.get(4).and_then(|s| s.parse().ok()).unwrap_or(0),
            fullmove: parts.get(5).and_then(|s| s.parse().ok()).unwrap_or(1),
        })
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                let c = self.grid[rank][file];
                if c == '.' {
                    empty += 1;
                } else {
                    if empty > 0 {
                        write!(out, "{empty}").unwrap();
                        empty = 0;
                    }
                    out.push(c);
                }
            }
            if empty > 0 {
                write!(out, "{empty}").unwrap();
            }
            if rank > 0 {
                out.push('/');
            }
        }
        let castling = if self.castling.is_empty() { "-".to_string() } else { self.castling.clone() };
        let ep = self.ep.map(coord_name).unwrap_or_else(|| "-".into());
        format!(
            "{} {} {} {} {} {}",
            out,
            if self.white_to_move { "w" } else { "b" },
            castling,
            ep,
            self.halfmove,
            self.fullmove
        )
    }

    pub fn white_to_move(&self) -> bool {
        self.white_to_move
    }

    pub fn piece_at(&self, (f, r): Coord) -> Option<char> {
        let c = self.grid[r as usize][f as usize];
        (c != '.').then_some(c)
    }

    /// Every occupied square with its FEN character.
    pub fn pieces(&self) -> Vec<(Coord, char)> {
        let mut v = Vec::new();
        for r in 0..8 {
            for f in 0..8 {
                if let Some(c) = self.piece_at((f, r)) {
                    v.push(((f, r), c));
                }
            }
        }
        v
    }

    /// Does the piece standing on `from` geometrically attack `target`?
    /// Ignores pins and whose turn it is.
    pub fn piece_attacks(&self, from: Coord, target: Coord) -> bool {
        let Some(c) = self.piece_at(from) else { return false };
        let (df, dr) = (target.0 - from.0, target.1 - from.1);
        if df == 0 && dr == 0 {
            return false;
        }
        match c.to_ascii_lowercase() {
            'p' => {
                let dir = if is_white(c) { 1 } else { -1 };
                dr == dir && df.abs() == 1
            }
            'n' => KNIGHT.contains(&(df, dr)),
            'k' => KING.contains(&(df, dr)),
            'r' => (df == 0 || dr == 0) && self.ray_clear(from, target),
            'b' => df.abs() == dr.abs() && self.ray_clear(from, target),
            'q' => (df == 0 || dr == 0 || df.abs() == dr.abs()) && self.ray_clear(from, target),
            _ => false,
        }
    }

    fn ray_clear(&self, from: Coord, to: Coord) -> bool {
        let step = ((to.0 - from.0).signum(), (to.1 - from.1).signum());
        let mut cur = (from.0 + step.0, from.1 + step.1);
        while cur != to {
            if self.piece_at(cur).is_some() {
                return false;
            }
            cur = (cur.0 + step.0, cur.1 + step.1);
        }
        true
    }

    /// Squares of all pieces of the given colour that attack `target`.
    pub fn attackers(&self, target: Coord, white: bool) -> Vec<Coord> {
        self.pieces()
            .into_iter()
            .filter(|&(sq, c)| is_white(c) == white && self.piece_attacks(sq, target))
            .map(|(sq, _)| sq)
            .collect()
    }

    fn king_square(&self, white: bool) -> Option<Coord> {
        let k = if white { 'K' } else { 'k' };
        self.pieces().into_iter().find(|&(_, c)| c == k).map(|(sq, _)| sq)
    }

    pub fn in_check(&self) -> bool {
        self.king_attacked(self.white_to_move)
    }

    fn king_attacked(&self, white: bool) -> bool {
        match self.king_square(white) {
            Some(k) => !self.attackers(k, !white).is_empty(),
            None => true,
        }
    }

    fn pseudo_moves(&self) -> Vec<String> {
        let mut out = Vec::new();
        let white = self.white_to_move;
        for (from, c) in self.pieces() {
            if is_white(c) != white {
                continue;
            }
            let kind = c.to_ascii_lowercase();
            let push = |to: Coord, out: &mut Vec<String>| {
                out.push(format!("{}{}", coord_name(from), coord_name(to)));
            };
            match kind {
                'p' => {
                    let dir = if white { 1 } else { -1 };
                    let start_rank = if white { 1 } else { 6 };
                    let last_rank = if white { 7 } else { 0 };
                    let mut targets = Vec::new();
                    let one = (from.0, from.1 + dir);
                    if on_board(one) && self.piece_at(one).is_none() {
                        targets.push(one);
                        let two = (from.0, from.1 + 2 * dir);
                        if from.1 == start_rank && self.piece_at(two).is_none() {
                            targets.push(two);
                        }
                    }
                    for df in [-1, 1] {
                        let t = (from.0 + df, from.1 + dir);
                        if !on_board(t) {
                            continue;
                        }
                        match self.piece_at(t) {
                            Some(o) if is_white(o) != white => targets.push(t),
                            None if self.ep == Some(t) => targets.push(t),
                            _ => {}
                        }
                    }
                    for t in targets {
                        if t.1 == last_rank {
                            for p in ['q', 'r', 'b', 'n'] {
                                out.push(format!("{}{}{}", coord_name(from), coord_name(t), p));
                            }
                        } else {
                            push(t, &mut out);
                        }
                    }
                }
                'n' | 'k' => {
                    let offsets = if kind == 'n' { KNIGHT } else { KING };
                    for (df, dr) in offsets {
                        let t = (from.0 + df, from.1 + dr);
                        if on_board(t) && self.piece_at(t).map_or(true, |o| is_white(o) != white) {
                            push(t, &mut out);
                        }
                    }
                }
                _ => {
                    let dirs: Vec<Coord> = match kind {
                        'r' => ROOK_DIRS.to_vec(),
                        'b' => BISHOP_DIRS.to_vec(),
                        _ => ROOK_DIRS.iter().chain(BISHOP_DIRS.iter()).copied().collect(),
                    };
                    for (df, dr) in dirs {
                        let mut t = (from.0 + df, from.1 + dr);
                        while on_board(t) {
                            match self.piece_at(t) {
                                None => push(t, &mut out),
                                Some(o) => {
                                    if is_white(o) != white {
                                        push(t, &mut out);
                                    }
                                    break;
                                }
                            }
                            t = (t.0 + df, t.1 + dr);
                        }
                    }
                }
            }
        }
        // castling
        let (rank, k, q, king) = if white { (0, 'K', 'Q', 'K') } else { (7, 'k', 'q', 'k') };
        let rook = if white { 'R' } else { 'r' };
        if self.piece_at((4, rank)) == Some(king) && !self.king_attacked(white) {
            if self.castling.contains(k)
                && self.piece_at((7, rank)) == Some(rook)
                && self.piece_at((5, rank)).is_none()
                && self.piece_at((6, rank)).is_none()
                && self.attackers((5, rank), !white).is_empty()
                && self.attackers((6, rank), !white).is_empty()
            {
                out.push(format!("e{}g{}", rank + 1, rank + 1));
            }
            if self.castling.contains(q)
                && self.piece_at((0, rank)) == Some(rook)
                && self.piece_at((1, rank)).is_none()
                && self.piece_at((2, rank)).is_none()
                && self.piece_at((3, rank)).is_none()
                && self.attackers((3, rank), !white).is_empty()
                && self.attackers((2, rank), !white).is_empty()
            {
                out.push(format!("e{}c{}", rank + 1, rank + 1));
            }
        }
        out
    }

    /// Applies a UCI move without any legality checking.
    pub fn make_uci(&self, uci: &str) -> Self {
        let from = parse_coord(&uci[0..2]).expect("bad uci");
        let to = parse_coord(&uci[2..4]).expect("bad uci");
        let promo = uci.chars().nth(4);
        let mut next = self.clone();
        let c = self.piece_at(from).expect("no piece on origin");
        let white = is_white(c);
        let kind = c.to_ascii_lowercase();
        let captured = self.piece_at(to);
        next.grid[from.1 as usize][from.0 as usize] = '.';
        let placed = match promo {
            Some(p) if white => p.to_ascii_uppercase(),
            Some(p) => p,
            None => c,
        };
        next.grid[to.1 as usize][to.0 as usize] = placed;
        if kind == 'p' && Some(to) == self.ep && captured.is_none() {
            next.grid[from.1 as usize][to.0 as usize] = '.';
        }
        if kind == 'k' && (to.0 - from.0).abs() == 2 {
            let (rf, rt) = if to.0 == 6 { (7, 5) } else { (0, 3) };
            let r = from.1 as usize;
            next.grid[r][rt] = next.grid[r][rf];
            next.grid[r][rf] = '.';
        }
        next.ep = if kind == 'p' && (to.1 - from.1).abs() == 2 {
            Some((from.0, (from.1 + to.1) / 2))
        } else {
            None
        };
        let mut lost = String::new();
        for sq in [from, to] {
            match sq {
                (4, 0) => lost.push_str("KQ"),
                (4, 7) => lost.push_str("kq"),
                (0, 0) => lost.push('Q'),
                (7, 0) => lost.push('K'),
                (0, 7) => lost.push('q'),
                (7, 7) => lost.push('k'),
                _ => {}
            }
        }
        next.castling.retain(|ch| !lost.contains(ch));
        next.halfmove = if kind == 'p' || captured.is_some() { 0 } else { self.halfmove + 1 };
        if !white {
            next.fullmove += 1;
        }
        next.white_to_move = !white;
        next
    }

    /// Legal moves as UCI strings, sorted.
    pub fn legal_moves(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .pseudo_moves()
            .into_iter()
            .filter(|m| !self.make_uci(m).king_attacked(self.white_to_move))
            .collect();
        v.sort();
        v
    }

    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = self.legal_moves();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves.iter().map(|m| self.make_uci(m).perft(depth - 1)).sum()
    }

    /// Standard algebraic notation for a legal UCI move.
    pub fn san(&self, uci: &str) -> String {
        self.san_among(uci, &self.legal_moves())
    }

    /// Every legal move paired with its SAN.
    pub fn legal_sans(&self) -> Vec<(String, String)> {
        let legal = self.legal_moves();
        legal.iter().map(|m| (m.clone(), self.san_among(m, &legal))).collect()
    }

    fn san_among(&self, uci: &str, legal: &[String]) -> String {
        let from = parse_coord(&uci[0..2]).unwrap();
        let to = parse_coord(&uci[2..4]).unwrap();
        let c = self.piece_at(from).unwrap();
        let kind = c.to_ascii_lowercase();
        let mut s = String::new();
        if kind == 'k' && (to.0 - from.0).abs() == 2 {
            s.push_str(if to.0 == 6 { "O-O" } else { "O-O-O" });
        } else if kind == 'p' {
            let capture = from.0 != to.0;
            if capture {
                s.push((b'a' + from.0 as u8) as char);
                s.push('x');
            }
            s.push_str(&coord_name(to));
            if let Some(p) = uci.chars().nth(4) {
                s.push('=');
                s.push(p.to_ascii_uppercase());
            }
        } else {
            s.push(kind.to_ascii_uppercase());
            let rivals: Vec<Coord> = legal
                .iter()
                .filter(|m| m[2..4] == uci[2..4] && m[0..2] != uci[0..2])
                .map(|m| parse_coord(&m[0..2]).unwrap())
                .filter(|&sq| self.piece_at(sq) == Some(c))
                .collect();
            if !rivals.is_empty() {
                if rivals.iter().all(|sq| sq.0 != from.0) {
                    s.push((b'a' + from.0 as u8) as char);
                } else if rivals.iter().all(|sq| sq.1 != from.1) {
                    s.push((b'1' + from.1 as u8) as char);
                } else {
                    s.push_str(&coord_name(from));
                }
            }
            if self.piece_at(to).is_some() {
                s.push('x');
            }
            s.push_str(&coord_name(to));
        }
        let after = self.make_uci(uci);
        if after.in_check() {
            s.push(if after.legal_moves().is_empty() { '#' } else { '+' });
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_has_twenty_moves() {
        assert_eq!(OraclePosition::startpos().legal_moves().len(), 20);
    }

    #[test]
    fn fen_round_trip() {
        let fen = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";
        assert_eq!(OraclePosition::from_fen(fen).unwrap().to_fen(), fen);
    }

    #[test]
    fn shallow_perft() {
        let p = OraclePosition::startpos();
        assert_eq!(p.perft(2), 400);
        assert_eq!(p.perft(3), 8902);
    }
}
