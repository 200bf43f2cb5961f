use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sanbench_rules::{format_san, numbered_movetext, parse_san, Board, Color};

use super::{ChatFactory, GameRecord, OrchestratorError, ProbeRecord, SCHEMA_VERSION};
use crate::chat::ChatMessage;
use crate::engine::Engine;
use crate::extract::san_tokens;

pub const PROBE_TEMPLATE: &str = "You are a strong chess player. The game below has reached a position with black \
to move.\n\n{movetext}\n\nWhat is the best move for black? Give your analysis and name every move you would consider.";

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ProbeSettings {
    /// Games to probe; fewer when fewer are eligible.
    pub sample: usize,
    pub seed: u64,
    pub min_fraction: f64,
    pub max_fraction: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { sample: 50, seed: 0, min_fraction: 0.3, max_fraction: 0.7 }
    }
}

/// Plies to keep for `fraction` of an `n`-ply game, with black to move and
/// a next move left to compare against. An even cut moves down by one, or
/// up by one when down would leave `[lo, hi]`.
pub fn probe_cut(fraction: f64, n: usize, lo: f64, hi: f64) -> Option<usize> {
    let raw = (fraction * n as f64).round() as usize;
    let inside = |c: usize| c % 2 == 1 && c < n && (lo..=hi).contains(&(c as f64 / n as f64));
    if raw % 2 == 1 {
        return inside(raw).then_some(raw);
    }
    [raw.checked_sub(1), Some(raw + 1)].into_iter().flatten().find(|&c| inside(c))
}

pub fn probe_prompt(sans: &[String]) -> String {
    PROBE_TEMPLATE.replace("{movetext}", &numbered_movetext(sans, true, 1))
}

/// Legal moves named in `response` (canonical SAN, first mention order),
/// whether one of them is `next_move`, and whether all of them are in
/// `engine_top`. An empty list is neither aligned nor valid.
pub fn score_suggestions(board: &Board, response: &str, next_move: &str, engine_top: &[String]) -> (Vec<String>, bool, bool) {
    let mut suggestions: Vec<String> = Vec::new();
    for tok in san_tokens(response) {
        if let Ok(m) = parse_san(board, &tok) {
            let san = format_san(board, &m).expect("parsed as legal");
            if !suggestions.contains(&san) {
                suggestions.push(san);
            }
        }
    }
    let next = parse_san(board, next_move).ok();
    let alignment = suggestions.iter().any(|s| parse_san(board, s).ok() == next && next.is_some());
    let valid = !suggestions.is_empty() && suggestions.iter().all(|s| engine_top.contains(s));
    (suggestions, alignment, valid)
}

/// Samples games, cuts each at a random fraction with black to move, and
/// asks the model for black's move. Games whose cut cannot be placed are
/// skipped.
pub fn run_probe(
    records: &[GameRecord],
    settings: ProbeSettings,
    engine: &mut dyn Engine,
    chat: &dyn ChatFactory,
) -> Result<Vec<ProbeRecord>, OrchestratorError> {
    let eligible: Vec<&GameRecord> = records.iter().filter(|r| r.plies.len() >= 2).collect();
    if eligible.is_empty() {
        return Err(OrchestratorError::Invalid("no game has two or more plies".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut picked = index::sample(&mut rng, eligible.len(), settings.sample.min(eligible.len())).into_vec();
    picked.sort_unstable();
    let mut out = Vec::new();
    for (i, &g) in picked.iter().enumerate() {
        let game = eligible[g];
        let fraction = rng.gen_range(settings.min_fraction..=settings.max_fraction);
        let n = game.plies.len();
        let Some(cut) = probe_cut(fraction, n, settings.min_fraction, settings.max_fraction) else {
            continue;
        };
        let sans = game.sans();
        let mut board = Board::startpos();
        for san in &sans[..cut] {
            let m = parse_san(&board, san)
                .map_err(|e| OrchestratorError::Invalid(format!("game {} does not replay: {e}", game.game_id)))?;
            board = board.apply(&m).expect("parsed as legal");
        }
        debug_assert_eq!(board.turn(), Color::Black);
        let prompt = probe_prompt(&sans[..cut]);
        let mut session = chat.probe(i, settings.seed ^ game.seed)?;
        let response = session.complete(vec![ChatMessage::user(prompt.clone())], None)?;
        let engine_top: Vec<String> = engine
            .top_moves(&board, 4)?
            .iter()
            .map(|r| format_san(&board, &r.mv).expect("engine moves are legal"))
            .collect();
        let next_move = sans[cut].clone();
        let (suggestions, alignment, suggestions_valid) = score_suggestions(&board, &response, &next_move, &engine_top);
        out.push(ProbeRecord {
            schema_version: SCHEMA_VERSION,
            game_id: game.game_id,
            fraction,
            cut,
            original_plies: n,
            fen: board.to_fen(),
            prompt,
            insight: response.clone(),
            response,
            suggestions,
            next_move,
            engine_top,
            alignment,
            suggestions_valid,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuts_leave_black_to_move() {
        assert_eq!(probe_cut(0.5, 10, 0.3, 0.7), Some(5));
        // round(0.4 * 10) = 4 is white to move; 3 is still inside
        assert_eq!(probe_cut(0.4, 10, 0.3, 0.7), Some(3));
        // round(0.3 * 10) = 3
        assert_eq!(probe_cut(0.3, 10, 0.3, 0.7), Some(3));
        // 0.32 * 6 rounds to 2; 1/6 is too early so 3 is used
        assert_eq!(probe_cut(0.32, 6, 0.3, 0.7), Some(3));
        assert_eq!(probe_cut(0.5, 2, 0.3, 0.7), Some(1));
        for n in 2..60 {
            for k in 0..=40 {
                let f = 0.3 + 0.01 * k as f64;
                if let Some(c) = probe_cut(f, n, 0.3, 0.7) {
                    assert!(c % 2 == 1 && c < n);
                    assert!((0.3..=0.7).contains(&(c as f64 / n as f64)));
                }
            }
        }
    }

    #[test]
    fn suggestion_rules() {
        let board = Board::startpos().apply(&parse_san(&Board::startpos(), "e4").unwrap()).unwrap();
        let top: Vec<String> = ["e5", "c5", "Nf6", "d5"].map(String::from).to_vec();
        assert_eq!(score_suggestions(&board, "I like c5 here.", "c5", &top), (vec!["c5".into()], true, true));
        let (s, aligned, valid) = score_suggestions(&board, "Maybe a6, or e5.", "e5", &top);
        assert_eq!(s, ["a6", "e5"]);
        assert!(aligned && !valid);
        assert_eq!(score_suggestions(&board, "No idea.", "e5", &top), (vec![], false, false));
    }
}
