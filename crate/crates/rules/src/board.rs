use std::fmt;
use std::str::FromStr;

use crate::types::{CastleSide, CastlingRights, Color, Piece, Role, Square};

const KNIGHT_OFFSETS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_OFFSETS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ORTHOGONAL: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIAGONAL: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const PROMOTIONS: [Role; 4] = [Role::Queen, Role::Rook, Role::Bishop, Role::Knight];

pub const STARTING_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// A move on a specific board. `role`, `capture`, `castle` and `en_passant`
/// are derived from the position the move was generated on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<Role>,
    pub role: Role,
    pub capture: Option<Role>,
    pub castle: Option<CastleSide>,
    pub en_passant: bool,
}

impl Move {
    pub fn is_capture(&self) -> bool {
        self.capture.is_some()
    }

    /// Long algebraic form used by UCI, e.g. `e2e4`, `e7e8q`, `e1g1`.
    pub fn to_uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(p) = self.promotion {
            s.push(p.char().to_ascii_lowercase());
        }
        s
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_uci())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FenError {
    #[error("FEN must have 6 space-separated fields, found {0}")]
    FieldCount(usize),
    #[error("malformed piece placement: {0}")]
    Placement(String),
    #[error("side to move must be 'w' or 'b', got {0:?}")]
    Turn(String),
    #[error("malformed castling field {0:?}")]
    Castling(String),
    #[error("malformed en-passant field {0:?}")]
    EnPassant(String),
    #[error("malformed move counter {0:?}")]
    Counter(String),
    #[error("invalid position: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal move {uci} in position {fen}")]
pub struct IllegalMove {
    pub uci: String,
    pub fen: String,
}

/// Complete chess position. Cheap to copy (a flat 64-byte mailbox plus a few
/// counters), so callers snapshot freely.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    squares: [Option<Piece>; 64],
    turn: Color,
    castling: CastlingRights,
    ep_square: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

impl Default for Board {
    fn default() -> Self {
        Self::startpos()
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board({})", self.to_fen())
    }
}

impl Board {
    /// Standard starting position, white to move.
    pub fn startpos() -> Board {
        Board::from_fen(STARTING_FEN).expect("starting FEN is valid")
    }

    pub fn turn(&self) -> Color {
        self.turn
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn ep_square(&self) -> Option<Square> {
        self.ep_square
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.squares[sq.index()]
    }

    /// All pieces in square order (a1, b1, ..., h8).
    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.piece_at(sq).map(|p| (sq, p)))
    }

    pub fn count(&self, color: Color, role: Role) -> usize {
        self.pieces().filter(|(_, p)| p.color == color && p.role == role).count()
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces().find(|(_, p)| p.color == color && p.role == Role::King).map(|(sq, _)| sq)
    }

    // ---------------------------------------------------------------- FEN

    pub fn from_fen(fen: &str) -> Result<Board, FenError> {
        let fields: Vec<&str> = fen.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(FenError::FieldCount(fields.len()));
        }
        let mut squares = [None; 64];
        let rows: Vec<&str> = fields[0].split('/').collect();
        if rows.len() != 8 {
            return Err(FenError::Placement(fields[0].to_string()));
        }
        for (i, row) in rows.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    if !(1..=8).contains(&d) {
                        return Err(FenError::Placement(fields[0].to_string()));
                    }
                    file += d as u8;
                } else {
                    let piece = Piece::from_fen_char(c).ok_or_else(|| FenError::Placement(fields[0].to_string()))?;
                    let sq = Square::from_coords(file, rank).ok_or_else(|| FenError::Placement(fields[0].to_string()))?;
                    squares[sq.index()] = Some(piece);
                    file += 1;
                }
                if file > 8 {
                    return Err(FenError::Placement(fields[0].to_string()));
                }
            }
            if file != 8 {
                return Err(FenError::Placement(fields[0].to_string()));
            }
        }
        let turn = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            other => return Err(FenError::Turn(other.to_string())),
        };
        let mut castling = CastlingRights::NONE;
        if fields[2] != "-" {
            for c in fields[2].chars() {
                let (color, side) = match c {
                    'K' => (Color::White, CastleSide::King),
                    'Q' => (Color::White, CastleSide::Queen),
                    'k' => (Color::Black, CastleSide::King),
                    'q' => (Color::Black, CastleSide::Queen),
                    _ => return Err(FenError::Castling(fields[2].to_string())),
                };
                castling.set(color, side, true);
            }
        }
        let ep_square = match fields[3] {
            "-" => None,
            s => Some(s.parse::<Square>().map_err(|_| FenError::EnPassant(s.to_string()))?),
        };
        let halfmove_clock = fields[4].parse().map_err(|_| FenError::Counter(fields[4].to_string()))?;
        let fullmove_number: u32 = fields[5].parse().map_err(|_| FenError::Counter(fields[5].to_string()))?;
        let mut board = Board {
            squares,
            turn,
            castling,
            ep_square,
            halfmove_clock,
            fullmove_number: fullmove_number.max(1),
        };
        board.validate()?;
        // Rights whose king or rook has left home are meaningless; drop them.
        for color in [Color::White, Color::Black] {
            let r = color.back_rank();
            let king_home = board.piece_at(Square::from_coords(4, r).unwrap()) == Some(Piece::new(color, Role::King));
            let rook = Some(Piece::new(color, Role::Rook));
            if !king_home || board.piece_at(Square::from_coords(7, r).unwrap()) != rook {
                board.castling.set(color, CastleSide::King, false);
            }
            if !king_home || board.piece_at(Square::from_coords(0, r).unwrap()) != rook {
                board.castling.set(color, CastleSide::Queen, false);
            }
        }
        Ok(board)
    }

    fn validate(&self) -> Result<(), FenError> {
        for color in [Color::White, Color::Black] {
            if self.count(color, Role::King) != 1 {
                return Err(FenError::Invalid("each side needs exactly one king"));
            }
        }
        if self
            .pieces()
            .any(|(sq, p)| p.role == Role::Pawn && (sq.rank() == 0 || sq.rank() == 7))
        {
            return Err(FenError::Invalid("pawn on first or last rank"));
        }
        if let Some(ep) = self.ep_square {
            // the side that just moved pushed a pawn two squares past `ep`
            let mover = self.turn.opposite();
            let expected_rank = if mover == Color::White { 2 } else { 5 };
            let pawn_sq = ep.offset(0, mover.pawn_dir());
            let origin = ep.offset(0, -mover.pawn_dir());
            let consistent = ep.rank() == expected_rank
                && self.piece_at(ep).is_none()
                && origin.is_some_and(|o| self.piece_at(o).is_none())
                && pawn_sq.is_some_and(|p| self.piece_at(p) == Some(Piece::new(mover, Role::Pawn)));
            if !consistent {
                return Err(FenError::Invalid("en-passant square inconsistent with placement"));
            }
        }
        let waiting = self.turn.opposite();
        let king = self.king_square(waiting).expect("checked above");
        if self.is_attacked(king, self.turn) {
            return Err(FenError::Invalid("side not to move is in check"));
        }
        Ok(())
    }

    pub fn to_fen(&self) -> String {
        let mut placement = String::with_capacity(72);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.piece_at(Square::from_coords(file, rank).unwrap()) {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            placement.push(char::from_digit(empty, 10).unwrap());
                            empty = 0;
                        }
                        placement.push(p.fen_char());
                    }
                }
            }
            if empty > 0 {
                placement.push(char::from_digit(empty, 10).unwrap());
            }
            if rank > 0 {
                placement.push('/');
            }
        }
        format!(
            "{} {} {} {} {} {}",
            placement,
            if self.turn == Color::White { 'w' } else { 'b' },
            self.castling,
            self.ep_square.map_or_else(|| "-".to_string(), |s| s.to_string()),
            self.halfmove_clock,
            self.fullmove_number
        )
    }

    // ------------------------------------------------------------ attacks

    /// Whether any piece of `by` geometrically attacks `target`.
    pub fn is_attacked(&self, target: Square, by: Color) -> bool {
        self.attack_scan(target, by, &mut |_| true)
    }

    /// Squares of `by`'s pieces that attack `target`, ignoring pins and
    /// whose turn it is. Sorted by square index.
    pub fn attackers(&self, target: Square, by: Color) -> Vec<Square> {
        let mut out = Vec::new();
        self.attack_scan(target, by, &mut |sq| {
            out.push(sq);
            false
        });
        out.sort();
        out
    }

    /// Calls `hit` for each attacker; stops early when `hit` returns true.
    fn attack_scan(&self, target: Square, by: Color, hit: &mut dyn FnMut(Square) -> bool) -> bool {
        let is = |sq: Square, role: Role| self.piece_at(sq) == Some(Piece::new(by, role));
        // a pawn of `by` attacks target from one rank behind (from by's view)
        for df in [-1, 1] {
            if let Some(sq) = target.offset(df, -by.pawn_dir()) {
                if is(sq, Role::Pawn) && hit(sq) {
                    return true;
                }
            }
        }
        for (df, dr) in KNIGHT_OFFSETS {
            if let Some(sq) = target.offset(df, dr) {
                if is(sq, Role::Knight) && hit(sq) {
                    return true;
                }
            }
        }
        for (df, dr) in KING_OFFSETS {
            if let Some(sq) = target.offset(df, dr) {
                if is(sq, Role::King) && hit(sq) {
                    return true;
                }
            }
        }
        for (dirs, slider) in [(ORTHOGONAL, Role::Rook), (DIAGONAL, Role::Bishop)] {
            for (df, dr) in dirs {
                let mut cur = target;
                while let Some(sq) = cur.offset(df, dr) {
                    if let Some(p) = self.piece_at(sq) {
                        if p.color == by && (p.role == slider || p.role == Role::Queen) && hit(sq) {
                            return true;
                        }
                        break;
                    }
                    cur = sq;
                }
            }
        }
        false
    }

    pub fn in_check(&self) -> bool {
        self.king_square(self.turn).is_some_and(|k| self.is_attacked(k, self.turn.opposite()))
    }

    // ------------------------------------------------------------ movegen

    fn push_move(&self, out: &mut Vec<Move>, from: Square, to: Square, role: Role, promotion: Option<Role>) {
        out.push(Move {
            from,
            to,
            promotion,
            role,
            capture: self.piece_at(to).map(|p| p.role),
            castle: None,
            en_passant: false,
        });
    }

    fn pseudo_legal(&self, out: &mut Vec<Move>) {
        let us = self.turn;
        for (from, piece) in self.pieces() {
            if piece.color != us {
                continue;
            }
            match piece.role {
                Role::Pawn => self.pawn_moves(from, out),
                Role::Knight | Role::King => {
                    let offsets = if piece.role == Role::Knight { KNIGHT_OFFSETS } else { KING_OFFSETS };
                    for (df, dr) in offsets {
                        if let Some(to) = from.offset(df, dr) {
                            if self.piece_at(to).map_or(true, |p| p.color != us) {
                                self.push_move(out, from, to, piece.role, None);
                            }
                        }
                    }
                }
                Role::Bishop | Role::Rook | Role::Queen => {
                    let dirs: &[(i8, i8)] = match piece.role {
                        Role::Bishop => &DIAGONAL,
                        Role::Rook => &ORTHOGONAL,
                        _ => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
                    };
                    for &(df, dr) in dirs {
                        let mut cur = from;
                        while let Some(to) = cur.offset(df, dr) {
                            match self.piece_at(to) {
                                None => self.push_move(out, from, to, piece.role, None),
                                Some(p) => {
                                    if p.color != us {
                                        self.push_move(out, from, to, piece.role, None);
                                    }
                                    break;
                                }
                            }
                            cur = to;
                        }
                    }
                }
            }
        }
        self.castling_moves(out);
    }

    fn pawn_moves(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.turn;
        let dir = us.pawn_dir();
        let last_rank = if us == Color::White { 7 } else { 0 };
        let start_rank = if us == Color::White { 1 } else { 6 };
        let emit = |to: Square, out: &mut Vec<Move>| {
            if to.rank() == last_rank {
                for promo in PROMOTIONS {
                    self.push_move(out, from, to, Role::Pawn, Some(promo));
                }
            } else {
                self.push_move(out, from, to, Role::Pawn, None);
            }
        };
        if let Some(one) = from.offset(0, dir) {
            if self.piece_at(one).is_none() {
                emit(one, out);
                if from.rank() == start_rank {
                    let two = from.offset(0, 2 * dir).unwrap();
                    if self.piece_at(two).is_none() {
                        emit(two, out);
                    }
                }
            }
        }
        for df in [-1, 1] {
            let Some(to) = from.offset(df, dir) else { continue };
            match self.piece_at(to) {
                Some(p) if p.color != us => emit(to, out),
                None if self.ep_square == Some(to) => out.push(Move {
                    from,
                    to,
                    promotion: None,
                    role: Role::Pawn,
                    capture: Some(Role::Pawn),
                    castle: None,
                    en_passant: true,
                }),
                _ => {}
            }
        }
    }

    fn castling_moves(&self, out: &mut Vec<Move>) {
        let us = self.turn;
        let them = us.opposite();
        let rank = us.back_rank();
        let sq = |file: u8| Square::from_coords(file, rank).unwrap();
        let king_from = sq(4);
        if self.piece_at(king_from) != Some(Piece::new(us, Role::King)) || self.is_attacked(king_from, them) {
            return;
        }
        let rook = Some(Piece::new(us, Role::Rook));
        if self.castling.has(us, CastleSide::King)
            && self.piece_at(sq(7)) == rook
            && self.piece_at(sq(5)).is_none()
            && self.piece_at(sq(6)).is_none()
            && !self.is_attacked(sq(5), them)
            && !self.is_attacked(sq(6), them)
        {
            out.push(Move {
                from: king_from,
                to: sq(6),
                promotion: None,
                role: Role::King,
                capture: None,
                castle: Some(CastleSide::King),
                en_passant: false,
            });
        }
        if self.castling.has(us, CastleSide::Queen)
            && self.piece_at(sq(0)) == rook
            && (1..=3).all(|f| self.piece_at(sq(f)).is_none())
            && !self.is_attacked(sq(3), them)
            && !self.is_attacked(sq(2), them)
        {
            out.push(Move {
                from: king_from,
                to: sq(2),
                promotion: None,
                role: Role::King,
                capture: None,
                castle: Some(CastleSide::Queen),
                en_passant: false,
            });
        }
    }

    /// Every legal move, in a deterministic order (by origin square, then
    /// generation order).
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut pseudo = Vec::with_capacity(64);
        self.pseudo_legal(&mut pseudo);
        let us = self.turn;
        pseudo.retain(|m| {
            let next = self.play_unchecked(m);
            let king = if m.role == Role::King { m.to } else { self.king_square(us).expect("king present") };
            !next.is_attacked(king, us.opposite())
        });
        pseudo
    }

    /// Legal moves paired with the positions they lead to; cheaper than
    /// calling [`Board::apply`] on each.
    pub fn successors(&self) -> Vec<(Move, Board)> {
        let mut pseudo = Vec::with_capacity(64);
        self.pseudo_legal(&mut pseudo);
        let us = self.turn;
        pseudo
            .into_iter()
            .filter_map(|m| {
                let next = self.play_unchecked(&m);
                let king = if m.role == Role::King { m.to } else { self.king_square(us).expect("king present") };
                (!next.is_attacked(king, us.opposite())).then_some((m, next))
            })
            .collect()
    }

    /// Stops at the first legal move found.
    pub fn has_legal_move(&self) -> bool {
        let mut pseudo = Vec::with_capacity(64);
        self.pseudo_legal(&mut pseudo);
        let us = self.turn;
        pseudo.iter().any(|m| {
            let next = self.play_unchecked(m);
            let king = if m.role == Role::King { m.to } else { self.king_square(us).expect("king present") };
            !next.is_attacked(king, us.opposite())
        })
    }

    pub fn is_legal(&self, m: &Move) -> bool {
        self.legal_moves().contains(m)
    }

    /// Returns the position after `m`. Fails if `m` is not legal here; the
    /// receiver is never modified.
    pub fn apply(&self, m: &Move) -> Result<Board, IllegalMove> {
        if !self.is_legal(m) {
            return Err(IllegalMove { uci: m.to_uci(), fen: self.to_fen() });
        }
        Ok(self.play_unchecked(m))
    }

    pub(crate) fn play_unchecked(&self, m: &Move) -> Board {
        let mut next = *self;
        let us = self.turn;
        let moving = self.piece_at(m.from).expect("origin occupied");
        next.squares[m.from.index()] = None;
        next.squares[m.to.index()] = Some(match m.promotion {
            Some(role) => Piece::new(us, role),
            None => moving,
        });
        if m.en_passant {
            let victim = m.to.offset(0, -us.pawn_dir()).unwrap();
            next.squares[victim.index()] = None;
        }
        if let Some(side) = m.castle {
            let rank = us.back_rank();
            let (rf, rt) = match side {
                CastleSide::King => (7, 5),
                CastleSide::Queen => (0, 3),
            };
            let rook_from = Square::from_coords(rf, rank).unwrap();
            let rook_to = Square::from_coords(rt, rank).unwrap();
            next.squares[rook_to.index()] = next.squares[rook_from.index()].take();
        }
        if m.role == Role::King {
            next.castling.clear_color(us);
        }
        for sq in [m.from, m.to] {
            for color in [Color::White, Color::Black] {
                let r = color.back_rank();
                if sq == Square::from_coords(0, r).unwrap() {
                    next.castling.set(color, CastleSide::Queen, false);
                }
                if sq == Square::from_coords(7, r).unwrap() {
                    next.castling.set(color, CastleSide::King, false);
                }
            }
        }
        next.ep_square = if m.role == Role::Pawn && m.from.rank().abs_diff(m.to.rank()) == 2 {
            m.from.offset(0, us.pawn_dir())
        } else {
            None
        };
        next.halfmove_clock = if m.role == Role::Pawn || m.capture.is_some() { 0 } else { self.halfmove_clock + 1 };
        if us == Color::Black {
            next.fullmove_number += 1;
        }
        next.turn = us.opposite();
        next
    }

    /// Finds the legal move with the given UCI text.
    pub fn parse_uci(&self, uci: &str) -> Result<Move, IllegalMove> {
        let err = || IllegalMove { uci: uci.to_string(), fen: self.to_fen() };
        if !(4..=5).contains(&uci.len()) || !uci.is_ascii() {
            return Err(err());
        }
        let from: Square = uci[0..2].parse().map_err(|_| err())?;
        let to: Square = uci[2..4].parse().map_err(|_| err())?;
        let promotion = match uci.chars().nth(4) {
            None => None,
            Some(c) => Some(Role::from_char(c).ok_or_else(err)?),
        };
        self.legal_moves()
            .into_iter()
            .find(|m| m.from == from && m.to == to && m.promotion == promotion)
            .ok_or_else(err)
    }

    /// Position identity for repetition: placement, turn, castling rights,
    /// and the en-passant square only when an en-passant capture is legal.
    pub fn repetition_key(&self) -> Board {
        let mut key = *self;
        key.halfmove_clock = 0;
        key.fullmove_number = 1;
        if key.ep_square.is_some() && !self.legal_moves().iter().any(|m| m.en_passant) {
            key.ep_square = None;
        }
        key
    }

    /// Only kings, or kings plus a single minor piece, or kings plus bishops
    /// all standing on one square colour.
    pub fn is_insufficient_material(&self) -> bool {
        let mut minors = 0;
        let mut bishop_colors = [false; 2];
        let mut knights = 0;
        for (sq, p) in self.pieces() {
            match p.role {
                Role::King => {}
                Role::Pawn | Role::Rook | Role::Queen => return false,
                Role::Knight => {
                    knights += 1;
                    minors += 1;
                }
                Role::Bishop => {
                    bishop_colors[sq.is_light() as usize] = true;
                    minors += 1;
                }
            }
        }
        minors <= 1 || (knights == 0 && !(bishop_colors[0] && bishop_colors[1]))
    }

    /// Number of leaf nodes of the legal move tree of the given depth.
    pub fn perft(&self, depth: u32) -> u64 {
        match depth {
            0 => 1,
            1 => self.legal_moves().len() as u64,
            _ => self
                .legal_moves()
                .iter()
                .map(|m| self.play_unchecked(m).perft(depth - 1))
                .sum(),
        }
    }
}

impl FromStr for Board {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Board::from_fen(s)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    #[test]
    fn initial_position_basics() {
        let b = Board::startpos();
        assert_eq!(b.turn(), Color::White);
        assert_eq!(b.pieces().count(), 32);
        assert_eq!(b.halfmove_clock(), 0);
        assert_eq!(b.fullmove_number(), 1);
        assert_eq!(b.castling(), CastlingRights::ALL);
        assert_eq!(b.legal_moves().len(), 20);
        assert_eq!(b.to_fen(), STARTING_FEN);
    }

    #[test]
    fn double_push_sets_ep_square() {
        let b = Board::startpos();
        let next = b.apply(&b.parse_uci("e2e4").unwrap()).unwrap();
        assert_eq!(next.ep_square(), Some(sq("e3")));
        assert_eq!(next.turn(), Color::Black);
        // the original is untouched
        assert_eq!(b.to_fen(), STARTING_FEN);
    }

    #[test]
    fn king_move_clears_both_rights() {
        let b = Board::from_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let after = b.apply(&b.parse_uci("e1f1").unwrap()).unwrap();
        assert!(!after.castling().has(Color::White, CastleSide::King));
        assert!(!after.castling().has(Color::White, CastleSide::Queen));
        assert!(after.castling().has(Color::Black, CastleSide::King));
    }

    #[test]
    fn rook_capture_clears_victim_right() {
        let b = Board::from_fen("r3k2r/8/8/8/8/8/6B1/R3K2R w KQkq - 0 1").unwrap();
        let after = b.apply(&b.parse_uci("g2a8").unwrap()).unwrap();
        assert!(!after.castling().has(Color::Black, CastleSide::Queen));
        assert!(after.castling().has(Color::Black, CastleSide::King));
    }

    #[test]
    fn castling_blocked_through_check() {
        // black rook on f8 covers f1
        let b = Board::from_fen("4kr2/8/8/8/8/8/8/4K2R w K - 0 1").unwrap();
        assert!(b.legal_moves().iter().all(|m| m.castle.is_none()));
    }

    #[test]
    fn en_passant_capture_removes_pawn() {
        let b = Board::from_fen("4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2").unwrap();
        let m = b.parse_uci("e5d6").unwrap();
        assert!(m.en_passant);
        let after = b.apply(&m).unwrap();
        assert_eq!(after.piece_at(sq("d5")), None);
        assert_eq!(after.piece_at(sq("d6")), Some(Piece::new(Color::White, Role::Pawn)));
    }

    #[test]
    fn illegal_apply_is_rejected() {
        let b = Board::startpos();
        let bogus = Move {
            from: sq("e1"),
            to: sq("e2"),
            promotion: None,
            role: Role::King,
            capture: None,
            castle: None,
            en_passant: false,
        };
        assert!(b.apply(&bogus).is_err());
    }

    #[test]
    fn fen_rejects_invalid_positions() {
        assert!(matches!(Board::from_fen("8/8/8/8/8/8/8/K7 w - - 0 1"), Err(FenError::Invalid(_))));
        assert!(matches!(
            Board::from_fen("k7/8/8/8/8/8/8/K6P w - - 0 1"),
            Err(FenError::Invalid(_))
        ));
        // black king in check with white to move
        assert!(matches!(
            Board::from_fen("k7/8/8/8/8/8/8/R3K3 w - - 0 1"),
            Err(FenError::Invalid(_))
        ));
        assert!(matches!(
            Board::from_fen("4k3/8/8/8/8/8/8/4K3 w - e6 0 1"),
            Err(FenError::Invalid(_))
        ));
        assert!(matches!(Board::from_fen("4k3/8/8/8/8/8/8/4K3 w -"), Err(FenError::FieldCount(3))));
    }

    #[test]
    fn insufficient_material_cases() {
        let kk = Board::from_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        assert!(kk.is_insufficient_material());
        let kbk = Board::from_fen("4k3/8/8/8/8/8/8/3BK3 w - - 0 1").unwrap();
        assert!(kbk.is_insufficient_material());
        let same_color_bishops = Board::from_fen("4kb2/8/8/8/8/8/8/2B1K3 w - - 0 1").unwrap();
        assert!(same_color_bishops.is_insufficient_material());
        let opposite_bishops = Board::from_fen("4k1b1/8/8/8/8/8/8/2B1K3 w - - 0 1").unwrap();
        assert!(!opposite_bishops.is_insufficient_material());
        let kr = Board::from_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 1").unwrap();
        assert!(!kr.is_insufficient_material());
    }
}
