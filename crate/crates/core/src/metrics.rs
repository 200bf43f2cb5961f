//! Per-game and per-variation scores computed from [`GameRecord`]s.
//!
//! `P_j` and `r_j` come from the attempt logs. A move that ran out of
//! attempts counts with `P = 1` and `r = 10` (all of its attempts), so an
//! illegal-limit game has one more log than it has legal moves. Ambiguous
//! and not-a-move verdicts count as illegal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::orchestrator::{GameRecord, Termination, Verdict};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("move index {t} outside 1..={available}")]
    OutOfRange { t: usize, available: usize },
    #[error("no games to aggregate")]
    Empty,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two pairs")]
    TooShort,
    #[error("a series has zero variance")]
    DegenerateVariance,
}

pub fn p_values(game: &GameRecord) -> Vec<u8> {
    game.attempts.iter().map(|l| l.p).collect()
}

pub fn r_values(game: &GameRecord) -> Vec<u32> {
    game.attempts.iter().map(|l| l.r).collect()
}

fn check_t(game: &GameRecord, t: usize) -> Result<(), MetricsError> {
    let available = game.attempts.len();
    if t == 0 || t > available {
        return Err(MetricsError::OutOfRange { t, available });
    }
    Ok(())
}

/// Share of the first `t` model moves with any illegal attempt.
pub fn imr(game: &GameRecord, t: usize) -> Result<f64, MetricsError> {
    check_t(game, t)?;
    let offending: u32 = game.attempts[..t].iter().map(|l| u32::from(l.p)).sum();
    Ok(f64::from(offending) / t as f64)
}

/// Illegal attempts per offending move over the first `t` moves; `None`
/// when none of them offended.
pub fn rblm(game: &GameRecord, t: usize) -> Result<Option<f64>, MetricsError> {
    check_t(game, t)?;
    let logs = &game.attempts[..t];
    let offending: u32 = logs.iter().map(|l| u32::from(l.p)).sum();
    let retries: u32 = logs.iter().map(|l| l.r).sum();
    Ok((offending > 0).then(|| f64::from(retries) / f64::from(offending)))
}

pub fn gl(game: &GameRecord) -> u32 {
    game.n_legal
}

/// Identity used when counting repeated illegal moves: surrounding
/// whitespace and trailing check marks or punctuation are ignored.
pub fn normalize_move_text(text: &str) -> String {
    text.trim().trim_end_matches(|c: char| "+#!?.,;:".contains(c) || c.is_whitespace()).to_string()
}

/// Illegal attempts of one offending move, grouped by text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffendingMove {
    pub index: u32,
    /// `a_i`.
    pub attempts: u32,
    /// Count per distinct text.
    pub counts: BTreeMap<String, u32>,
}

/// The illegal attempts of every offending move in the game.
pub fn illegal_profile(game: &GameRecord) -> Vec<OffendingMove> {
    game.attempts
        .iter()
        .filter(|l| l.r > 0)
        .map(|l| {
            let mut counts = BTreeMap::new();
            for a in l.attempts.iter().filter(|a| a.verdict != Verdict::Legal) {
                let text = a.extracted.as_deref().unwrap_or(&a.raw);
                *counts.entry(normalize_move_text(text)).or_insert(0) += 1;
            }
            OffendingMove { index: l.index, attempts: l.r, counts }
        })
        .collect()
}

/// Mean over offending moves of the sum of squared shares of each distinct
/// illegal text; `None` without offending moves.
pub fn mrs(game: &GameRecord) -> Option<f64> {
    let profile = illegal_profile(game);
    if profile.is_empty() {
        return None;
    }
    let total: f64 = profile
        .iter()
        .map(|m| {
            let a = f64::from(m.attempts);
            m.counts.values().map(|&c| (f64::from(c) / a).powi(2)).sum::<f64>()
        })
        .sum();
    Some(total / profile.len() as f64)
}

/// Where the board-evaluation checkpoint for move `t` is taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeCheckpoint {
    /// After the model's `t`-th legal move.
    #[default]
    ModelMove,
    /// After white's `t`-th move, the opening being the first.
    WhiteMove,
}

/// White-relative evaluation at move `t`, if the game got that far.
pub fn be_at(game: &GameRecord, t: usize, checkpoint: BeCheckpoint) -> Option<i32> {
    if t == 0 {
        return None;
    }
    match checkpoint {
        BeCheckpoint::ModelMove => game.evaluations.get(t - 1).copied(),
        BeCheckpoint::WhiteMove => game.ply_evaluations.get(2 * (t - 1)).copied(),
    }
}

/// Evaluation after the model's `t`-th legal move.
pub fn be(game: &GameRecord, t: usize) -> Option<i32> {
    be_at(game, t, BeCheckpoint::ModelMove)
}

/// Mean evaluation over all of the model's legal moves.
pub fn be_full(game: &GameRecord) -> Option<f64> {
    mean(game.evaluations.iter().map(|&v| f64::from(v)))
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean, sample standard deviation and count of the defined values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stat {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        let mean = mean(v.iter().copied());
        let std = match (mean, n) {
            (Some(m), n) if n >= 2 => Some((v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()),
            (Some(_), _) => Some(0.0),
            _ => None,
        };
        Stat { mean, std, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMetrics {
    pub game_id: u64,
    pub termination: Termination,
    /// Over every attempt log of the game.
    pub imr: f64,
    pub rblm: Option<f64>,
    pub gl: u32,
    pub be_checkpoint: Option<f64>,
    pub be_full: Option<f64>,
    pub mrs: Option<f64>,
}

/// Whole-game metrics; `None` for a game without attempt logs.
pub fn game_metrics(game: &GameRecord, checkpoint_move: usize, checkpoint: BeCheckpoint) -> Option<GameMetrics> {
    let t = game.attempts.len();
    if t == 0 {
        return None;
    }
    Some(GameMetrics {
        game_id: game.game_id,
        termination: game.termination,
        imr: imr(game, t).expect("t in range"),
        rblm: rblm(game, t).expect("t in range"),
        gl: gl(game),
        be_checkpoint: be_at(game, checkpoint_move, checkpoint).map(f64::from),
        be_full: be_full(game),
        mrs: mrs(game),
    })
}

/// Means over the games alive at move `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: usize,
    pub imr: Option<f64>,
    pub rblm: Option<f64>,
    pub be: Option<f64>,
    /// Games with at least `t` model moves attempted.
    pub survivors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub checkpoint_move: usize,
    pub checkpoint: BeCheckpoint,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { checkpoint_move: 20, checkpoint: BeCheckpoint::ModelMove }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub games: Vec<GameMetrics>,
    /// Records given, including excluded ones.
    pub total_records: usize,
    /// Games lost to transport failures; not scored.
    pub transport_failures: usize,
    /// Games stopped by the move cap; scored except for GL and BE.
    pub move_capped: usize,
    pub imr: Stat,
    pub rblm: Stat,
    pub gl: Stat,
    pub be_checkpoint: Stat,
    pub be_full: Stat,
    pub mrs: Stat,
    /// Share of scored games that reached the checkpoint.
    pub checkpoint_coverage: f64,
    /// Share of scored games that ended by the rules of chess.
    pub natural_rate: f64,
    pub curves: Vec<CurvePoint>,
    pub options: AggregateOptions,
}

pub fn aggregate(records: &[GameRecord], options: AggregateOptions) -> Result<MetricsSummary, MetricsError> {
    let scored: Vec<&GameRecord> = records.iter().filter(|r| r.counts_for_metrics()).collect();
    let games: Vec<GameMetrics> = scored
        .iter()
        .filter_map(|r| game_metrics(r, options.checkpoint_move, options.checkpoint))
        .collect();
    if games.is_empty() {
        return Err(MetricsError::Empty);
    }
    let uncapped = || games.iter().filter(|g| g.termination != Termination::MoveCap);
    let max_gl = scored.iter().map(|r| r.n_legal as usize).max().unwrap_or(0);
    let curves = (1..=max_gl)
        .map(|t| {
            let alive: Vec<&&GameRecord> = scored.iter().filter(|r| r.attempts.len() >= t).collect();
            CurvePoint {
                t,
                imr: mean(alive.iter().map(|r| imr(r, t).expect("alive"))),
                rblm: mean(alive.iter().filter_map(|r| rblm(r, t).expect("alive"))),
                be: mean(
                    alive
                        .iter()
                        .filter(|r| r.termination != Termination::MoveCap)
                        .filter_map(|r| be_at(r, t, options.checkpoint).map(f64::from)),
                ),
                survivors: alive.len(),
            }
        })
        .collect();
    let n = games.len() as f64;
    let reached = uncapped().filter(|g| g.be_checkpoint.is_some()).count();
    let uncapped_n = uncapped().count();
    Ok(MetricsSummary {
        total_records: records.len(),
        transport_failures: records.len() - scored.len(),
        move_capped: games.iter().filter(|g| g.termination == Termination::MoveCap).count(),
        imr: Stat::of(games.iter().map(|g| g.imr)),
        rblm: Stat::of(games.iter().filter_map(|g| g.rblm)),
        gl: Stat::of(uncapped().map(|g| f64::from(g.gl))),
        be_checkpoint: Stat::of(uncapped().filter_map(|g| g.be_checkpoint)),
        be_full: Stat::of(uncapped().filter_map(|g| g.be_full)),
        mrs: Stat::of(games.iter().filter_map(|g| g.mrs)),
        checkpoint_coverage: if uncapped_n == 0 { 0.0 } else { reached as f64 / uncapped_n as f64 },
        natural_rate: games.iter().filter(|g| g.termination.is_natural()).count() as f64 / n,
        curves,
        options,
        games,
    })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooShort);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
