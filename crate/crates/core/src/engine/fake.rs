//! A tiny deterministic UCI engine.
//!
//! [`search`] is a fixed-depth negamax over material plus a small
//! positional term. [`serve`] speaks enough UCI (with MultiPV) for
//! [`super::UciEngine`] to drive it, and [`serve_script`] replays a canned
//! transcript so protocol failures can be staged.
//!
//! Script format: a line `> cmd` starts a block; the lines after it are sent
//! back verbatim when the client's next command starts with `cmd`. Commands
//! that do not match the next block get no reply. Lines starting with `#`
//! are comments.

use std::cmp::Reverse;
use std::io::{self, BufRead, Write};

use sanbench_rules::{Board, Color, Move, Role, Square};

use super::{Engine, EngineError, EvalScore, RankedMove, MATE_CP};

pub const DEFAULT_DEPTH: u32 = 2;

fn value(role: Role) -> i32 {
    match role {
        Role::Pawn => 100,
        Role::Knight => 320,
        Role::Bishop => 330,
        Role::Rook => 500,
        Role::Queen => 900,
        Role::King => 0,
    }
}

fn center_distance(sq: Square) -> i32 {
    let f = (2 * sq.file() as i32 - 7).abs() / 2;
    let r = (2 * sq.rank() as i32 - 7).abs() / 2;
    f.max(r)
}

fn positional(role: Role, color: Color, sq: Square) -> i32 {
    let advance = match color {
        Color::White => sq.rank() as i32 - 1,
        Color::Black => 6 - sq.rank() as i32,
    };
    match role {
        Role::Pawn => {
            let central = if (3..=4).contains(&sq.file()) && (2..=3).contains(&advance) { 12 } else { 0 };
            advance * 4 + central
        }
        Role::Knight => 30 - 10 * center_distance(sq),
        Role::Bishop => 15 - 5 * center_distance(sq),
        Role::Queen => 5 - 2 * center_distance(sq),
        Role::Rook | Role::King => 0,
    }
}

/// Static evaluation from the side to move's point of view.
pub fn static_eval(board: &Board) -> i32 {
    let white: i32 = board
        .pieces()
        .map(|(sq, p)| {
            let v = value(p.role) + positional(p.role, p.color, sq);
            if p.color == Color::White {
                v
            } else {
                -v
            }
        })
        .sum();
    if board.turn() == Color::White {
        white
    } else {
        -white
    }
}

fn negamax(board: &Board, depth: u32, ply: i32, nodes: &mut u64) -> i32 {
    *nodes += 1;
    if depth == 0 {
        return if board.has_legal_move() {
            static_eval(board)
        } else if board.in_check() {
            -(MATE_CP - ply)
        } else {
            0
        };
    }
    let next = board.successors();
    if next.is_empty() {
        return if board.in_check() { -(MATE_CP - ply) } else { 0 };
    }
    next.iter().map(|(_, b)| -negamax(b, depth - 1, ply + 1, nodes)).max().expect("non-empty")
}

fn to_score(v: i32) -> EvalScore {
    if v.abs() > MATE_CP - 100 {
        let plies = MATE_CP - v.abs();
        let moves = (plies + 1) / 2;
        EvalScore::Mate(if v > 0 { moves } else { -moves })
    } else {
        EvalScore::Centipawns(v)
    }
}

/// Every legal move with its side-to-move relative score, best first; ties
/// broken by UCI text.
pub fn search(board: &Board, depth: u32) -> (Vec<(Move, EvalScore)>, u64) {
    let depth = depth.max(1);
    let mut nodes = 0;
    let mut scored: Vec<(Move, i32)> = board
        .successors()
        .into_iter()
        .map(|(m, b)| (m, -negamax(&b, depth - 1, 1, &mut nodes)))
        .collect();
    scored.sort_by_key(|(m, v)| (Reverse(*v), m.to_uci()));
    (scored.into_iter().map(|(m, v)| (m, to_score(v))).collect(), nodes)
}

/// The fake engine used in-process, without a child process. Remembers
/// the last search so evaluating and then replying costs one search.
#[derive(Debug, Clone)]
pub struct FakeEngine {
    depth: u32,
    last: Option<(Board, Vec<(Move, EvalScore)>)>,
}

impl FakeEngine {
    pub fn new(depth: u32) -> Self {
        FakeEngine { depth: depth.max(1), last: None }
    }
}

impl Default for FakeEngine {
    fn default() -> Self {
        FakeEngine::new(DEFAULT_DEPTH)
    }
}

impl Engine for FakeEngine {
    fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
        let ranked = match &self.last {
            Some((b, r)) if b == board => r.clone(),
            _ => {
                let (r, _) = search(board, self.depth);
                self.last = Some((*board, r.clone()));
                r
            }
        };
        if ranked.is_empty() {
            return Err(EngineError::NoLegalMoves);
        }
        Ok(ranked
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (mv, s))| RankedMove { mv, rank: i as u32 + 1, score: s.from_side_to_move(board.turn()) })
            .collect())
    }
}

/// White plays a fixed line: at full move `n` (n ≥ 2) the only candidate
/// offered is `line[n - 2]`, so the opening move comes first from the
/// harness and the line starts with white's second move. Everything else
/// goes to a [`FakeEngine`].
#[derive(Debug, Clone)]
pub struct ScriptedEngine {
    line: Vec<String>,
    inner: FakeEngine,
}

impl ScriptedEngine {
    pub fn new<S: Into<String>>(line: impl IntoIterator<Item = S>) -> Self {
        ScriptedEngine { line: line.into_iter().map(Into::into).collect(), inner: FakeEngine::default() }
    }
}

impl Engine for ScriptedEngine {
    fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
        let scripted = (board.turn() == Color::White)
            .then(|| (board.fullmove_number() as usize).checked_sub(2))
            .flatten()
            .and_then(|i| self.line.get(i));
        let Some(san) = scripted else {
            return self.inner.top_moves(board, k);
        };
        let mv = sanbench_rules::parse_san(board, san).map_err(|e| EngineError::Config(format!("scripted move {san}: {e}")))?;
        let score = self
            .inner
            .top_moves(board, usize::MAX)?
            .into_iter()
            .find(|r| r.mv == mv)
            .map_or(EvalScore::Centipawns(0), |r| r.score);
        Ok(vec![RankedMove { mv, rank: 1, score }])
    }
}

fn parse_position(args: &str) -> Option<Board> {
    let (mut board, rest) = if let Some(rest) = args.strip_prefix("startpos") {
        (Board::startpos(), rest)
    } else {
        let rest = args.strip_prefix("fen")?.trim_start();
        let (fen, rest) = match rest.find(" moves") {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        (Board::from_fen(fen.trim()).ok()?, rest)
    };
    if let Some(moves) = rest.trim().strip_prefix("moves") {
        for uci in moves.split_whitespace() {
            let m = board.parse_uci(uci).ok()?;
            board = board.apply(&m).ok()?;
        }
    }
    Some(board)
}

/// Runs the search-mode engine until `quit` or end of input.
pub fn serve<R: BufRead, W: Write>(input: R, mut out: W) -> io::Result<()> {
    let mut board = Board::startpos();
    let mut multipv = 1usize;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        let (cmd, args) = line.split_once(' ').unwrap_or((line, ""));
        match cmd {
            "uci" => {
                writeln!(out, "id name sanbench-fake")?;
                writeln!(out, "id author sanbench")?;
                writeln!(out, "option name Hash type spin default 16 min 1 max 1024")?;
                writeln!(out, "option name MultiPV type spin default 1 min 1 max 500")?;
                writeln!(out, "uciok")?;
            }
            "isready" => writeln!(out, "readyok")?,
            "setoption" => {
                let rest = args.strip_prefix("name ").unwrap_or(args);
                let (name, value) = rest.split_once(" value ").unwrap_or((rest, ""));
                match name.trim() {
                    "MultiPV" => multipv = value.trim().parse().unwrap_or(1).max(1),
                    "Hash" => {}
                    other => writeln!(out, "No such option: {other}")?,
                }
            }
            "ucinewgame" => board = Board::startpos(),
            "position" => match parse_position(args) {
                Some(b) => board = b,
                None => writeln!(out, "info string invalid position")?,
            },
            "go" => {
                let mut depth = DEFAULT_DEPTH;
                let mut words = args.split_whitespace();
                while let Some(w) = words.next() {
                    if w == "depth" {
                        depth = words.next().and_then(|d| d.parse().ok()).unwrap_or(DEFAULT_DEPTH).clamp(1, 3);
                    }
                }
                let (ranked, nodes) = search(&board, depth);
                if ranked.is_empty() {
                    writeln!(out, "info depth 0 score {}", if board.in_check() { "mate 0" } else { "cp 0" })?;
                    writeln!(out, "bestmove (none)")?;
                } else {
                    for (i, (m, s)) in ranked.iter().take(multipv).enumerate() {
                        let score = match s {
                            EvalScore::Centipawns(cp) => format!("cp {cp}"),
                            EvalScore::Mate(n) => format!("mate {n}"),
                        };
                        writeln!(out, "info depth {depth} multipv {} score {score} nodes {nodes} pv {}", i + 1, m.to_uci())?;
                    }
                    writeln!(out, "bestmove {}", ranked[0].0.to_uci())?;
                }
            }
            "quit" => break,
            _ => {}
        }
        out.flush()?;
    }
    out.flush()
}

/// Replays a canned transcript; see the module docs for the format.
pub fn serve_script<R: BufRead, W: Write>(script: &str, input: R, mut out: W) -> io::Result<()> {
    let mut blocks: Vec<(String, Vec<String>)> = Vec::new();
    for line in script.lines() {
        if line.starts_with('#') {
            continue;
        }
        if let Some(cmd) = line.strip_prefix("> ") {
            blocks.push((cmd.trim().to_string(), Vec::new()));
        } else if let Some((_, replies)) = blocks.last_mut() {
            if !line.trim().is_empty() {
                replies.push(line.to_string());
            }
        }
    }
    let mut next = 0;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line == "quit" {
            break;
        }
        if let Some((cmd, replies)) = blocks.get(next) {
            if line.starts_with(cmd.as_str()) {
                for r in replies {
                    writeln!(out, "{r}")?;
                }
                out.flush()?;
                next += 1;
            }
        }
    }
    Ok(())
}
