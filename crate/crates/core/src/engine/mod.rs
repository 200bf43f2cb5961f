//! Chess engine access: evaluation, ranked top moves, and sampled replies.
//!
//! [`UciEngine`] drives an external process over the UCI text protocol.
//! [`fake`] contains a small deterministic UCI engine used for offline runs
//! and protocol fixtures.

pub mod fake;
mod uci;

use std::path::PathBuf;

use rand::Rng;
use sanbench_rules::{Board, Color, Move};
use serde::{Deserialize, Serialize};

pub use uci::{parse_info_line, InfoLine, UciEngine};

/// The four openings white chooses from, uniformly.
pub const OPENINGS: [&str; 4] = ["e4", "d4", "Nf3", "e3"];

/// Centipawn magnitude assigned to "mated on the board"; a forced mate in
/// `n` maps to `MATE_CP - n`.
pub const MATE_CP: i32 = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("failed to spawn engine {path}: {source}")]
    Spawn {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("engine did not send {expected:?} within {timeout_ms} ms")]
    Timeout { expected: String, timeout_ms: u64 },
    #[error("engine rejected option {0}")]
    OptionRejected(String),
    #[error("engine process exited unexpectedly")]
    Exited,
    #[error("unparsable engine output: {0}")]
    Unparsable(String),
    #[error("engine proposed illegal move {uci} in {fen}")]
    IllegalMove { uci: String, fen: String },
    #[error("position has no legal moves")]
    NoLegalMoves,
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("engine i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchLimit {
    Nodes(u64),
    Depth(u32),
    Movetime(u64),
}

impl SearchLimit {
    pub fn go_command(self) -> String {
        match self {
            SearchLimit::Nodes(n) => format!("go nodes {n}"),
            SearchLimit::Depth(d) => format!("go depth {d}"),
            SearchLimit::Movetime(ms) => format!("go movetime {ms}"),
        }
    }
}

impl Default for SearchLimit {
    fn default() -> Self {
        SearchLimit::Nodes(1_000_000)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub limit: SearchLimit,
    pub multipv: u32,
    pub hash_mb: u32,
    /// How long to wait for each protocol acknowledgement.
    pub timeout_ms: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("stockfish"),
            args: Vec::new(),
            limit: SearchLimit::default(),
            multipv: 3,
            hash_mb: 16,
            timeout_ms: 30_000,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.multipv == 0 {
            return Err(EngineError::Config("multipv must be at least 1".into()));
        }
        match self.limit {
            SearchLimit::Nodes(0) | SearchLimit::Depth(0) | SearchLimit::Movetime(0) => {
                Err(EngineError::Config("search limit must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Engine score from white's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum EvalScore {
    Centipawns(i32),
    /// Signed distance to mate in moves; positive means white mates.
    Mate(i32),
}

impl EvalScore {
    /// Collapses mate scores onto the centipawn axis as `±(10000 - n)`.
    pub fn to_centipawns(self) -> i32 {
        match self {
            EvalScore::Centipawns(cp) => cp,
            EvalScore::Mate(n) if n > 0 => MATE_CP - n,
            EvalScore::Mate(n) => -(MATE_CP + n),
        }
    }

    /// Converts a side-to-move relative UCI score to white's view.
    pub fn from_side_to_move(self, turn: Color) -> EvalScore {
        match (turn, self) {
            (Color::White, s) => s,
            (Color::Black, EvalScore::Centipawns(cp)) => EvalScore::Centipawns(-cp),
            (Color::Black, EvalScore::Mate(n)) => EvalScore::Mate(-n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedMove {
    pub mv: Move,
    /// 1-based.
    pub rank: u32,
    pub score: EvalScore,
}

/// Anything that can rank moves and evaluate positions.
pub trait Engine: Send {
    /// Called once before each game; engines with state reset it here.
    fn new_game(&mut self) -> Result<(), EngineError> {
        Ok(())
    }

    /// Up to `k` best moves, best first. Fewer when fewer legal moves exist.
    fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError>;

    /// White-relative centipawns, mate mapped to `±(10000 - n)`. Finished
    /// positions are scored without asking the engine: a mated side to move
    /// gets `∓10000`, stalemate is 0.
    fn evaluate(&mut self, board: &Board) -> Result<i32, EngineError> {
        if let Some(cp) = terminal_eval(board) {
            return Ok(cp);
        }
        let best = self.top_moves(board, 1)?;
        let first = best.first().ok_or(EngineError::NoLegalMoves)?;
        Ok(first.score.to_centipawns())
    }
}

impl<E: Engine + ?Sized> Engine for Box<E> {
    fn new_game(&mut self) -> Result<(), EngineError> {
        (**self).new_game()
    }
    fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
        (**self).top_moves(board, k)
    }
    fn evaluate(&mut self, board: &Board) -> Result<i32, EngineError> {
        (**self).evaluate(board)
    }
}

pub fn terminal_eval(board: &Board) -> Option<i32> {
    if board.has_legal_move() {
        return None;
    }
    Some(match (board.in_check(), board.turn()) {
        (false, _) => 0,
        (true, Color::White) => -MATE_CP,
        (true, Color::Black) => MATE_CP,
    })
}

/// A reply drawn uniformly from the engine's top three, plus the candidates
/// it was drawn from.
pub fn sample_reply<E: Engine + ?Sized, R: Rng + ?Sized>(
    engine: &mut E,
    board: &Board,
    rng: &mut R,
) -> Result<(Move, Vec<RankedMove>), EngineError> {
    let candidates = engine.top_moves(board, 3)?;
    if candidates.is_empty() {
        return Err(EngineError::NoLegalMoves);
    }
    let pick = rng.gen_range(0..candidates.len());
    Ok((candidates[pick].mv, candidates))
}

pub fn sample_opening<R: Rng + ?Sized>(rng: &mut R) -> &'static str {
    OPENINGS[rng.gen_range(0..OPENINGS.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sanbench_rules::parse_san;

    /// Returns the first `n` legal moves with made-up scores.
    struct Stub {
        width: usize,
    }

    impl Engine for Stub {
        fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
            Ok(board
                .legal_moves()
                .into_iter()
                .take(k.min(self.width))
                .enumerate()
                .map(|(i, mv)| RankedMove { mv, rank: i as u32 + 1, score: EvalScore::Centipawns(-(i as i32)) })
                .collect())
        }
    }

    #[test]
    fn mate_mapping_is_monotone() {
        assert_eq!(EvalScore::Mate(1).to_centipawns(), 9_999);
        assert_eq!(EvalScore::Mate(-1).to_centipawns(), -9_999);
        assert!(EvalScore::Mate(1).to_centipawns() > EvalScore::Mate(2).to_centipawns());
        assert!(EvalScore::Mate(-1).to_centipawns() < EvalScore::Mate(-2).to_centipawns());
        assert_eq!(EvalScore::Centipawns(37).to_centipawns(), 37);
    }

    #[test]
    fn side_to_move_conversion() {
        assert_eq!(EvalScore::Centipawns(50).from_side_to_move(Color::Black), EvalScore::Centipawns(-50));
        assert_eq!(EvalScore::Mate(2).from_side_to_move(Color::Black), EvalScore::Mate(-2));
        assert_eq!(EvalScore::Mate(2).from_side_to_move(Color::White), EvalScore::Mate(2));
    }

    #[test]
    fn terminal_positions_are_scored_locally() {
        let mut b = Board::startpos();
        for s in ["f3", "e5", "g4", "Qh4#"] {
            b = b.apply(&parse_san(&b, s).unwrap()).unwrap();
        }
        assert_eq!(Stub { width: 3 }.evaluate(&b).unwrap(), -MATE_CP);
        let stalemate = Board::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert_eq!(Stub { width: 3 }.evaluate(&stalemate).unwrap(), 0);
    }

    #[test]
    fn single_legal_move_is_always_sampled() {
        // the only legal move is Kxg2
        let b = Board::from_fen("7k/8/8/8/8/8/6q1/7K w - - 0 1").unwrap();
        assert_eq!(b.legal_moves().len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (m, cands) = sample_reply(&mut Stub { width: 3 }, &b, &mut rng).unwrap();
            assert_eq!(cands.len(), 1);
            assert_eq!(m, b.legal_moves()[0]);
        }
    }

    #[test]
    fn reply_sampling_is_uniform_and_reproducible() {
        let b = Board::startpos();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 3];
        let mut first_run = Vec::new();
        for _ in 0..3000 {
            let (m, cands) = sample_reply(&mut Stub { width: 3 }, &b, &mut rng).unwrap();
            let idx = cands.iter().position(|c| c.mv == m).unwrap();
            counts[idx] += 1;
            first_run.push(m);
        }
        for c in counts {
            let freq = c as f64 / 3000.0;
            assert!((freq - 1.0 / 3.0).abs() <= 0.03, "{counts:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let again: Vec<Move> =
            (0..3000).map(|_| sample_reply(&mut Stub { width: 3 }, &b, &mut rng).unwrap().0).collect();
        assert_eq!(first_run, again);
    }

    #[test]
    fn opening_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let draws: Vec<&str> = (0..4000).map(|_| sample_opening(&mut rng)).collect();
        for d in &draws {
            counts[OPENINGS.iter().position(|o| o == d).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 4000.0 - 0.25).abs() <= 0.025, "{counts:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let again: Vec<&str> = (0..4000).map(|_| sample_opening(&mut rng)).collect();
        assert_eq!(draws, again);
    }

    #[test]
    fn config_validation() {
        let mut c = EngineConfig::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.limit, SearchLimit::Nodes(1_000_000));
        c.multipv = 0;
        assert!(c.validate().is_err());
        let toml_text = "path = \"sf\"\nlimit = { depth = 12 }\nmultipv = 4\n";
        let parsed: EngineConfig = toml::from_str(toml_text).unwrap();
        assert_eq!(parsed.limit, SearchLimit::Depth(12));
        assert_eq!(parsed.multipv, 4);
    }
}
