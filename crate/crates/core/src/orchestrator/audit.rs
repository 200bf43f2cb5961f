use sanbench_rules::{format_san, game_status, parse_san, Board, Color, GameStatus};

use super::{GameRecord, Termination, Verdict};
use crate::extract::{extract_direct, ExtractionMethod};

/// One inconsistency found in a stored record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditIssue {
    pub game_id: u64,
    /// 1-based model move, when the issue belongs to one.
    pub move_index: Option<u32>,
    pub message: String,
}

impl std::fmt::Display for AuditIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.move_index {
            Some(j) => write!(f, "game {} move {j}: {}", self.game_id, self.message),
            None => write!(f, "game {}: {}", self.game_id, self.message),
        }
    }
}

/// Replays the game and re-judges every attempt against the position it was
/// made in. An empty result means the record is consistent.
pub fn audit(record: &GameRecord) -> Vec<AuditIssue> {
    let mut issues = Vec::new();
    let mut issue = |j: Option<u32>, message: String| {
        issues.push(AuditIssue { game_id: record.game_id, move_index: j, message });
    };

    // positions the model was asked to move in, in order
    let mut asked: Vec<Board> = Vec::new();
    let mut board = Board::startpos();
    let mut history = Vec::new();
    for (i, ply) in record.plies.iter().enumerate() {
        if ply.mover != board.turn() {
            issue(None, format!("ply {} is marked as {:?} but {:?} is to move", i + 1, ply.mover, board.turn()));
        }
        if board.turn() == Color::Black {
            asked.push(board);
        }
        let Ok(m) = parse_san(&board, &ply.san) else {
            issue(None, format!("ply {} ({}) is not legal", i + 1, ply.san));
            return issues;
        };
        if format_san(&board, &m).as_deref() != Ok(ply.san.as_str()) {
            issue(None, format!("ply {} ({}) is not canonical SAN", i + 1, ply.san));
        }
        history.push(board);
        board = board.apply(&m).expect("parsed as legal");
    }
    let status = game_status(&board, &history);
    if record.attempts.last().is_some_and(|l| !l.is_legal()) {
        asked.push(board);
    }
    // a failed request leaves the turn it was for without a log
    if record.termination == Termination::TransportFailure && asked.len() == record.attempts.len() + 1 {
        asked.pop();
    }

    if asked.len() != record.attempts.len() {
        issue(None, format!("{} attempt logs for {} model turns", record.attempts.len(), asked.len()));
    }
    let n_legal = record.attempts.iter().filter(|l| l.is_legal()).count() as u32;
    if n_legal != record.n_legal {
        issue(None, format!("n_legal is {} but {n_legal} logs end legally", record.n_legal));
    }
    if record.evaluations.len() != n_legal as usize {
        issue(None, format!("{} evaluations for {n_legal} legal model moves", record.evaluations.len()));
    }
    if record.ply_evaluations.len() != record.plies.len() {
        issue(None, "ply evaluations do not line up with plies".to_string());
    }

    for (log, position) in record.attempts.iter().zip(&asked) {
        let j = Some(log.index);
        if log.fen != position.to_fen() {
            issue(j, format!("recorded position {} differs from the replayed {}", log.fen, position.to_fen()));
        }
        if log.attempts.is_empty() || log.attempts.len() > 10 {
            issue(j, format!("{} attempts", log.attempts.len()));
        }
        for (k, a) in log.attempts.iter().enumerate() {
            let verdict = Verdict::judge(position, a.extracted.as_deref());
            if verdict != a.verdict {
                issue(j, format!("attempt {} recorded as {:?}, re-judged {:?}", k + 1, a.verdict, verdict));
            }
            if a.method == ExtractionMethod::Direct && extract_direct(&a.raw).candidate != a.extracted {
                issue(j, format!("attempt {} extraction does not reproduce", k + 1));
            }
            let last = k + 1 == log.attempts.len();
            if a.verdict == Verdict::Legal && !last {
                issue(j, format!("legal attempt {} is not the last", k + 1));
            }
        }
        let legal_last = log.attempts.last().is_some_and(|a| a.verdict == Verdict::Legal);
        if legal_last != log.is_legal() {
            issue(j, "final move does not match the last verdict".to_string());
        }
        let r = log.attempts.iter().filter(|a| a.verdict != Verdict::Legal).count() as u32;
        let p = u8::from(r > 0 || !log.is_legal());
        if (log.r, log.p) != (r, p) {
            issue(j, format!("r, p recorded as {}, {} but recount gives {r}, {p}", log.r, log.p));
        }
    }

    let final_log_failed = record.attempts.last().is_some_and(|l| !l.is_legal() && l.attempts.len() == 10);
    if (record.termination == Termination::IllegalLimit) != final_log_failed {
        issue(None, "illegal-limit termination does not match the final attempt log".to_string());
    }
    match Termination::from_status(status) {
        Some(t) if t != record.termination => {
            issue(None, format!("final position is {t:?} but the record says {:?}", record.termination))
        }
        None if record.termination.is_natural() => {
            issue(None, format!("record says {:?} but the final position is still playable", record.termination))
        }
        _ => {}
    }
    if status != GameStatus::Ongoing && record.termination == Termination::IllegalLimit {
        issue(None, "illegal-limit recorded in a finished position".to_string());
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::engine::fake::FakeEngine;
    use crate::prompts::{variation, VariationId};

    #[test]
    fn clean_games_pass_and_tampering_is_caught() {
        let chat = MockFactory::new(MockChat::Synthetic(SyntheticProfile::reference_population()));
        let settings = GameSettings { move_cap: 15, ..GameSettings::default() };
        for g in 0..4 {
            let (record, _) = play_game(&variation(VariationId::Baseline), g, 100 + g, &mut FakeEngine::default(), &chat, settings);
            assert_eq!(audit(&record), vec![], "game {g}");
        }
        let (mut record, _) = play_game(&variation(VariationId::Baseline), 0, 5, &mut FakeEngine::default(), &chat, settings);
        record.attempts[1].attempts[0].verdict = Verdict::Legal;
        let issues = audit(&record);
        assert!(issues.iter().any(|i| i.message.contains("re-judged")), "{issues:?}");
    }
}
