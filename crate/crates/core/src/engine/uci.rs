use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use sanbench_rules::Board;

use super::{Engine, EngineConfig, EngineError, EvalScore, RankedMove, SearchLimit};

/// One parsed `info` line. Only the fields the client uses are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoLine {
    pub depth: u32,
    pub multipv: u32,
    /// Relative to the side to move, as sent.
    pub score: EvalScore,
    /// True for `lowerbound` / `upperbound` scores.
    pub bound: bool,
    pub pv_first: String,
}

/// Parses `info ... multipv N score cp|mate X ... pv m1 m2 ...`. Lines
/// without both a score and a pv yield `None`.
pub fn parse_info_line(line: &str) -> Option<InfoLine> {
    let mut tokens = line.split_whitespace();
    if tokens.next()? != "info" {
        return None;
    }
    let mut depth = 0;
    let mut multipv = 1;
    let mut score = None;
    let mut bound = false;
    let mut pv_first = None;
    while let Some(tok) = tokens.next() {
        match tok {
            "depth" => depth = tokens.next()?.parse().ok()?,
            "multipv" => multipv = tokens.next()?.parse().ok()?,
            "score" => {
                let kind = tokens.next()?;
                let value: i32 = tokens.next()?.parse().ok()?;
                score = Some(match kind {
                    "cp" => EvalScore::Centipawns(value),
                    "mate" => EvalScore::Mate(value),
                    _ => return None,
                });
            }
            "lowerbound" | "upperbound" => bound = true,
            "pv" => {
                pv_first = tokens.next().map(str::to_string);
                break;
            }
            // free text runs to end of line
            "string" => return None,
            _ => {}
        }
    }
    Some(InfoLine { depth, multipv, score: score?, bound, pv_first: pv_first? })
}

/// A UCI engine running as a child process. Owned by one game at a time.
pub struct UciEngine {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    config: EngineConfig,
    multipv: u32,
    name: Option<String>,
    options: Vec<String>,
}

impl UciEngine {
    /// Spawns the engine and completes the `uci` / `isready` handshake.
    pub fn start(config: EngineConfig) -> Result<UciEngine, EngineError> {
        config.validate()?;
        let mut child = Command::new(&config.path)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| EngineError::Spawn { path: config.path.display().to_string(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut engine = UciEngine {
            child,
            stdin,
            lines: rx,
            multipv: 1,
            config,
            name: None,
            options: Vec::new(),
        };
        engine.handshake()?;
        Ok(engine)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn timeout(&self) -> Duration {
        Duration::from_millis(self.config.timeout_ms)
    }

    fn send(&mut self, command: &str) -> Result<(), EngineError> {
        writeln!(self.stdin, "{command}").map_err(|_| EngineError::Exited)?;
        self.stdin.flush().map_err(|_| EngineError::Exited)
    }

    /// Reads lines until one satisfies `done`, handing every line to `each`.
    fn read_until(
        &mut self,
        expected: &str,
        timeout: Duration,
        mut each: impl FnMut(&str) -> Result<bool, EngineError>,
    ) -> Result<(), EngineError> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) => {
                    if each(line.trim())? {
                        return Ok(());
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    return Err(EngineError::Timeout {
                        expected: expected.to_string(),
                        timeout_ms: timeout.as_millis() as u64,
                    })
                }
                Err(RecvTimeoutError::Disconnected) => return Err(EngineError::Exited),
            }
        }
    }

    fn handshake(&mut self) -> Result<(), EngineError> {
        self.send("uci")?;
        let mut name = None;
        let mut options = Vec::new();
        self.read_until("uciok", self.timeout(), |line| {
            if let Some(rest) = line.strip_prefix("id name ") {
                name = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("option name ") {
                let opt = rest.split(" type ").next().unwrap_or(rest).trim().to_string();
                options.push(opt);
            }
            Ok(line == "uciok")
        })?;
        self.name = name;
        self.options = options;
        if self.advertises("Hash") {
            self.send(&format!("setoption name Hash value {}", self.config.hash_mb))?;
        }
        self.set_multipv(self.config.multipv)?;
        self.sync()
    }

    fn advertises(&self, option: &str) -> bool {
        self.options.iter().any(|o| o.eq_ignore_ascii_case(option))
    }

    fn set_multipv(&mut self, k: u32) -> Result<(), EngineError> {
        if k == self.multipv {
            return Ok(());
        }
        if !self.advertises("MultiPV") {
            return Err(EngineError::OptionRejected("MultiPV".into()));
        }
        self.send(&format!("setoption name MultiPV value {k}"))?;
        self.multipv = k;
        Ok(())
    }

    /// `isready` / `readyok`, surfacing any option complaint seen meanwhile.
    fn sync(&mut self) -> Result<(), EngineError> {
        self.send("isready")?;
        self.read_until("readyok", self.timeout(), |line| {
            if let Some(rest) = line.strip_prefix("No such option: ") {
                return Err(EngineError::OptionRejected(rest.trim().to_string()));
            }
            if line.starts_with("ERROR") || line.starts_with("error") {
                return Err(EngineError::OptionRejected(line.to_string()));
            }
            Ok(line == "readyok")
        })
    }

    fn search(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
        let legal = board.legal_moves().len();
        if legal == 0 {
            return Err(EngineError::NoLegalMoves);
        }
        let wanted = k.min(legal);
        let target = (wanted as u32).max(self.config.multipv);
        if target != self.multipv {
            self.set_multipv(target)?;
            self.sync()?;
        }
        self.send(&format!("position fen {}", board.to_fen()))?;
        self.send(&self.config.limit.go_command())?;
        let budget = match self.config.limit {
            SearchLimit::Movetime(ms) => self.timeout() + Duration::from_millis(ms),
            _ => self.timeout(),
        };
        let mut latest: BTreeMap<u32, InfoLine> = BTreeMap::new();
        self.read_until("bestmove", budget, |line| {
            if line.starts_with("bestmove") {
                return Ok(true);
            }
            if let Some(info) = parse_info_line(line) {
                if !info.bound && latest.get(&info.multipv).map_or(true, |prev| info.depth >= prev.depth) {
                    latest.insert(info.multipv, info);
                }
            }
            Ok(false)
        })?;
        let mut out = Vec::with_capacity(wanted);
        for rank in 1..=wanted as u32 {
            let info = latest
                .get(&rank)
                .ok_or_else(|| EngineError::Unparsable(format!("no final line for multipv {rank}")))?;
            let mv = board.parse_uci(&info.pv_first).map_err(|_| EngineError::IllegalMove {
                uci: info.pv_first.clone(),
                fen: board.to_fen(),
            })?;
            out.push(RankedMove { mv, rank, score: info.score.from_side_to_move(board.turn()) });
        }
        Ok(out)
    }
}

impl Engine for UciEngine {
    fn new_game(&mut self) -> Result<(), EngineError> {
        self.send("ucinewgame")?;
        self.sync()
    }

    fn top_moves(&mut self, board: &Board, k: usize) -> Result<Vec<RankedMove>, EngineError> {
        self.search(board, k)
    }
}

impl Drop for UciEngine {
    fn drop(&mut self) {
        let _ = self.send("quit");
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multipv_info() {
        let line = "info depth 18 seldepth 24 multipv 2 score cp -35 nodes 1000000 nps 900000 pv d7d5 c2c4 e7e6";
        let info = parse_info_line(line).unwrap();
        assert_eq!(info.depth, 18);
        assert_eq!(info.multipv, 2);
        assert_eq!(info.score, EvalScore::Centipawns(-35));
        assert_eq!(info.pv_first, "d7d5");
        assert!(!info.bound);
    }

    #[test]
    fn parses_mate_and_bounds() {
        let info = parse_info_line("info depth 5 score mate -3 upperbound pv e8d8").unwrap();
        assert_eq!(info.score, EvalScore::Mate(-3));
        assert_eq!(info.multipv, 1);
        assert!(info.bound);
    }

    #[test]
    fn skips_lines_without_pv_or_score() {
        assert!(parse_info_line("info depth 1 currmove e2e4 currmovenumber 1").is_none());
        assert!(parse_info_line("info string NNUE evaluation enabled").is_none());
        assert!(parse_info_line("bestmove e2e4").is_none());
        assert!(parse_info_line("info depth 3 score cp 10").is_none());
    }
}
