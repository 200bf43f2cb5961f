//! Helpers shared by the integration tests and the acceptance report.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use sanbench::chat::SyntheticProfile;
use sanbench::engine::fake::FakeEngine;
use sanbench::engine::{Engine, EngineError};
use sanbench::extract::ExtractionMethod;
use sanbench::orchestrator::{
    run_experiment, Attempt, GameRecord, GameSettings, MockChat, MockFactory, MoveAttemptLog, Termination, Verdict,
    SCHEMA_VERSION,
};
use sanbench::prompts::{describe_board, variation, VariationId};
use sanbench_oracle::{coord_name, parse_coord, Coord, OraclePosition};
use sanbench_rules::Board;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn builtin_engines() -> impl Fn() -> Result<Box<dyn Engine>, EngineError> + Sync {
    || Ok(Box::new(FakeEngine::default()) as Box<dyn Engine>)
}

/// Positions reached by uniformly random legal play, up to `max_plies`.
pub fn random_boards(n: usize, seed: u64, max_plies: usize) -> Vec<Board> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let plies = rng.gen_range(0..=max_plies);
            let mut b = Board::startpos();
            for _ in 0..plies {
                let moves = b.legal_moves();
                if moves.is_empty() {
                    break;
                }
                b = b.apply(&moves[rng.gen_range(0..moves.len())]).unwrap();
            }
            b
        })
        .collect()
}

// ---- board description against the reference board

fn role_name(c: char) -> &'static str {
    match c.to_ascii_lowercase() {
        'p' => "pawn",
        'n' => "knight",
        'b' => "bishop",
        'r' => "rook",
        'q' => "queen",
        _ => "king",
    }
}

type Relation = BTreeSet<(String, Coord)>;

fn parse_list(text: &str) -> Result<Relation, String> {
    if text == "nothing" {
        return Ok(Relation::new());
    }
    let item = Regex::new(r"^the (\w+) on ([a-h][1-8])$").unwrap();
    text.replace(" and ", ", ")
        .split(", ")
        .map(|s| {
            let c = item.captures(s).ok_or_else(|| format!("bad list item {s:?} in {text:?}"))?;
            Ok((c[1].to_string(), parse_coord(&c[2]).unwrap()))
        })
        .collect()
}

fn relation(p: &OraclePosition, squares: Vec<Coord>) -> Relation {
    squares.into_iter().map(|sq| (role_name(p.piece_at(sq).unwrap()).to_string(), sq)).collect()
}

/// Everything the description of `board` gets wrong or leaves out,
/// according to the naive reference board. Returns the number of relations
/// checked alongside.
pub fn describe_discrepancies(board: &Board) -> (Vec<String>, usize) {
    let fen = board.to_fen();
    let p = OraclePosition::from_fen(&fen).unwrap();
    let text = describe_board(board);
    let sentence = Regex::new(
        r"^A (\w+) is on ([a-h][1-8]), can capture (.+?), can be captured by (.+?), and is defended by (.+?)\.( It has just advanced two squares and can be captured en passant on ([a-h][1-8])\.)?$",
    )
    .unwrap();
    let mut problems = Vec::new();
    let mut checked = 0;
    let mut described = Vec::new();
    // the pawn that just pushed two squares, when a legal move takes it
    let ep_victim = fen.split(' ').nth(3).and_then(parse_coord).and_then(|ep| {
        let pawn_lands = |m: &String| {
            parse_coord(&m[2..4]) == Some(ep) && p.piece_at(parse_coord(&m[0..2]).unwrap()).is_some_and(|c| c.eq_ignore_ascii_case(&'p'))
        };
        let victim = (ep.0, if ep.1 == 2 { 3 } else { 4 });
        p.legal_moves().iter().any(pawn_lands).then_some((victim, ep))
    });
    for line in text.lines().filter(|l| l.starts_with("A ")) {
        let Some(c) = sentence.captures(line) else {
            problems.push(format!("{fen}: unparsable {line:?}"));
            continue;
        };
        let sq = parse_coord(&c[2]).unwrap();
        described.push(sq);
        let Some(piece) = p.piece_at(sq) else {
            problems.push(format!("{fen}: {line:?} names an empty square"));
            continue;
        };
        let white = piece.is_ascii_uppercase();
        if &c[1] != role_name(piece) {
            problems.push(format!("{fen}: {line:?} but the piece is a {}", role_name(piece)));
        }
        let enemies: Vec<Coord> = p
            .pieces()
            .into_iter()
            .filter(|&(t, o)| o.is_ascii_uppercase() != white && p.piece_attacks(sq, t))
            .map(|(t, _)| t)
            .collect();
        for (label, stated, truth) in [
            ("capture", &c[3], relation(&p, enemies)),
            ("captured by", &c[4], relation(&p, p.attackers(sq, !white))),
            ("defended by", &c[5], relation(&p, p.attackers(sq, white))),
        ] {
            checked += truth.len().max(1);
            match parse_list(stated) {
                Ok(stated) if stated == truth => {}
                Ok(stated) => problems.push(format!("{fen} {}: {label} {stated:?}, oracle {truth:?}", coord_name(sq))),
                Err(e) => problems.push(format!("{fen}: {e}")),
            }
        }
        let stated_ep = c.get(7).map(|m| parse_coord(m.as_str()).unwrap());
        let truth_ep = ep_victim.filter(|(v, _)| *v == sq).map(|(_, ep)| ep);
        if stated_ep != truth_ep {
            problems.push(format!("{fen} {}: en passant {stated_ep:?}, oracle {truth_ep:?}", coord_name(sq)));
        }
    }
    // every piece once, white then black, a1..h8
    let mut want: Vec<(bool, Coord)> = p.pieces().into_iter().map(|(sq, c)| (!c.is_ascii_uppercase(), sq)).collect();
    want.sort_by_key(|&(black, (f, r))| (black, r, f));
    let want: Vec<Coord> = want.into_iter().map(|(_, sq)| sq).collect();
    if described != want {
        problems.push(format!("{fen}: pieces described {described:?}, expected {want:?}"));
    }
    let castling = fen.split(' ').nth(2).unwrap().to_string();
    for (white, name) in [(true, "White"), (false, "Black")] {
        for kind in ['p', 'n', 'b', 'r', 'q', 'k'] {
            let n = p.pieces().iter().filter(|(_, c)| c.to_ascii_lowercase() == kind && c.is_ascii_uppercase() == white).count();
            let role = role_name(kind);
            let line = if n == 1 { format!("{name} has 1 {role} left.") } else { format!("{name} has {n} {role}s left.") };
            if !text.lines().any(|l| l == line) {
                problems.push(format!("{fen}: missing {line:?}"));
            }
        }
        for (flag, word) in [('K', "kingside"), ('Q', "queenside")] {
            let flag = if white { flag } else { flag.to_ascii_lowercase() };
            let line = format!("{name} {} castle {word}.", if castling.contains(flag) { "can" } else { "cannot" });
            if !text.lines().any(|l| l == line) {
                problems.push(format!("{fen}: missing {line:?}"));
            }
        }
    }
    (problems, checked)
}

// ---- metrics

fn attempt(text: &str, verdict: Verdict) -> Attempt {
    Attempt {
        raw: text.to_string(),
        extracted: Some(text.to_string()),
        verdict,
        method: ExtractionMethod::Direct,
        extractor_reply: None,
        fallback: false,
    }
}

/// A record with one attempt log per entry: the illegal texts, then a
/// legal move unless there are ten of them. Evaluations are 100, 200, ...
pub fn hand_game(moves: &[&[&str]]) -> GameRecord {
    let attempts: Vec<MoveAttemptLog> = moves
        .iter()
        .enumerate()
        .map(|(j, bad)| {
            let mut log = MoveAttemptLog::new(j as u32 + 1, String::new());
            log.attempts = bad.iter().map(|t| attempt(t, Verdict::Illegal)).collect();
            if bad.len() < 10 {
                log.attempts.push(attempt("e5", Verdict::Legal));
                log.final_san = Some("e5".into());
            }
            log.settle();
            log
        })
        .collect();
    let n_legal = attempts.iter().filter(|l| l.is_legal()).count() as u32;
    GameRecord {
        schema_version: SCHEMA_VERSION,
        game_id: 0,
        variation: VariationId::Baseline,
        config_hash: String::new(),
        opening: "e4".into(),
        seed: 0,
        plies: Vec::new(),
        evaluations: (1..=n_legal as i32).map(|i| 100 * i).collect(),
        ply_evaluations: Vec::new(),
        engine_replies: Vec::new(),
        termination: if n_legal as usize == moves.len() { Termination::MoveCap } else { Termination::IllegalLimit },
        n_legal,
        attempts,
        transcript_ref: String::new(),
        error: None,
    }
}

/// Metrics recomputed from the raw attempt texts: each position is rebuilt
/// on the reference board and each text judged by exact comparison with
/// the reference SAN of every legal move.
#[derive(Debug, Clone, PartialEq)]
pub struct Brute {
    pub imr: f64,
    pub rblm: Option<f64>,
    pub gl: u32,
    pub mrs: Option<f64>,
    pub be_full: Option<f64>,
    pub be20: Option<f64>,
    /// Recorded verdicts the reference board disagrees with.
    pub verdict_mismatches: usize,
}

fn strip(text: &str) -> String {
    let mut s = text.trim().to_string();
    while s.ends_with(|c: char| "+#!?.,;:".contains(c) || c.is_whitespace()) {
        s.pop();
    }
    s
}

pub fn brute_force(g: &GameRecord) -> Brute {
    // the SANs legal at each black turn
    let mut p = OraclePosition::startpos();
    let mut black_turns: Vec<Vec<String>> = Vec::new();
    for ply in &g.plies {
        let sans = p.legal_sans();
        let (uci, _) = sans.iter().find(|(_, s)| *s == ply.san).expect("recorded ply is legal");
        let next = p.make_uci(uci);
        if !p.white_to_move() {
            black_turns.push(sans.into_iter().map(|(_, s)| s).collect());
        }
        p = next;
    }
    if !p.white_to_move() {
        black_turns.push(p.legal_sans().into_iter().map(|(_, s)| s).collect());
    }
    let mut offending = 0u32;
    let mut retries = 0u32;
    let mut gl = 0u32;
    let mut shares = Vec::new();
    let mut mismatches = 0;
    for (log, legal_sans) in g.attempts.iter().zip(&black_turns) {
        let mut illegal_texts: Vec<String> = Vec::new();
        let mut ended_legal = false;
        for a in &log.attempts {
            let legal = a.extracted.as_ref().is_some_and(|t| legal_sans.contains(t));
            if legal != (a.verdict == Verdict::Legal) {
                mismatches += 1;
            }
            if legal {
                ended_legal = true;
            } else {
                illegal_texts.push(strip(a.extracted.as_deref().unwrap_or(&a.raw)));
            }
        }
        if ended_legal {
            gl += 1;
        }
        if !illegal_texts.is_empty() {
            offending += 1;
            retries += illegal_texts.len() as u32;
            let mut seen: Vec<(String, u32)> = Vec::new();
            for t in &illegal_texts {
                match seen.iter_mut().find(|(s, _)| s == t) {
                    Some((_, c)) => *c += 1,
                    None => seen.push((t.clone(), 1)),
                }
            }
            let a = illegal_texts.len() as f64;
            shares.push(seen.iter().map(|(_, c)| (*c as f64 / a) * (*c as f64 / a)).sum::<f64>());
        }
    }
    let n = g.attempts.len() as f64;
    let evals = &g.evaluations;
    Brute {
        imr: offending as f64 / n,
        rblm: (offending > 0).then(|| retries as f64 / offending as f64),
        gl,
        mrs: (!shares.is_empty()).then(|| shares.iter().sum::<f64>() / shares.len() as f64),
        be_full: (!evals.is_empty()).then(|| evals.iter().map(|&v| v as f64).sum::<f64>() / evals.len() as f64),
        be20: evals.get(19).map(|&v| v as f64),
        verdict_mismatches: mismatches,
    }
}

/// Textbook two-pass sample correlation.
pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// Plans with random misbehaviour; most end in an exhausted retry budget.
pub fn random_profile(seed: u64, plans: usize) -> SyntheticProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<char> = "abcdefgh?".chars().collect();
    let plans = (0..plans)
        .map(|_| {
            let len = rng.gen_range(1..30);
            let mut plan: Vec<String> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.6) {
                        String::new()
                    } else {
                        let k = rng.gen_range(1..=6);
                        (0..k).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
                    }
                })
                .collect();
            if rng.gen_bool(0.8) {
                plan.push((0..10).map(|_| alphabet[rng.gen_range(0..3)]).collect());
            }
            plan
        })
        .collect();
    SyntheticProfile { plans, breadth: 3 }
}

/// `n` games of simulated play with random misbehaviour.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<GameRecord> {
    let chat = MockFactory::new(MockChat::Synthetic(random_profile(seed, 64)));
    let settings = GameSettings { move_cap: 60, ..GameSettings::default() };
    run_experiment(&variation(VariationId::Baseline), n, 8, seed, settings, &builtin_engines(), &chat, |_, _| Ok(())).unwrap()
}

// ---- the reference population

/// Seed and size of the shipped regression run.
pub const REFERENCE_SEED: u64 = 11;
pub const REFERENCE_GAMES: usize = 40;

/// Per-plan values worked out by hand from the population's plans:
/// (IMR, RBLM, GL, MRS).
pub fn reference_plan_values() -> [(f64, f64, f64, f64); 4] {
    [
        (3.0 / 5.0, 14.0 / 3.0, 4.0, (1.0 + 5.0 / 9.0 + 0.16) / 3.0),
        (3.0 / 11.0, 13.0 / 3.0, 10.0, (1.0 + 1.0 + 0.12) / 3.0),
        (2.0 / 5.0, 6.0, 4.0, (0.5 + 1.0) / 2.0),
        (3.0 / 25.0, 4.0, 24.0, 1.0),
    ]
}

/// Population means when every plan is used equally often.
pub fn reference_means() -> (f64, f64, f64, f64) {
    let v = reference_plan_values();
    let mean = |f: fn(&(f64, f64, f64, f64)) -> f64| v.iter().map(f).sum::<f64>() / 4.0;
    (mean(|x| x.0), mean(|x| x.1), mean(|x| x.2), mean(|x| x.3))
}

// ---- the probe fixture

pub struct ProbeTruth {
    pub game_id: u64,
    pub suggestions: Vec<String>,
    pub aligned: bool,
    pub valid: bool,
}

pub fn probe_truth() -> Vec<ProbeTruth> {
    let text = std::fs::read_to_string(fixture("probe_truth.txt")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let words: Vec<&str> = l.split_whitespace().collect();
            let n = words.len();
            let suggestions = words[1..n - 2].iter().filter(|w| **w != "-").map(|w| w.to_string()).collect();
            ProbeTruth { game_id: words[0].parse().unwrap(), suggestions, aligned: words[n - 2] == "yes", valid: words[n - 1] == "yes" }
        })
        .collect()
}

pub fn probe_fixture_games() -> Vec<GameRecord> {
    sanbench::report::store::read_jsonl_file(&fixture("probe_games.jsonl")).unwrap()
}

/// The shipped probe run: 20 stored games, one scripted answer each.
pub fn run_fixture_probe() -> Vec<sanbench::orchestrator::ProbeRecord> {
    use sanbench::chat::ScriptedAdapter;
    use sanbench::orchestrator::{run_probe, ProbeSettings};
    let chat = MockFactory::new(MockChat::Script(ScriptedAdapter::from_path(&fixture("probe_script.jsonl")).unwrap()));
    let settings = ProbeSettings { sample: 20, seed: 9, ..ProbeSettings::default() };
    run_probe(&probe_fixture_games(), settings, &mut FakeEngine::default(), &chat).unwrap()
}

/// Problems with a probe run, judged against the hand-scored answers.
pub fn probe_discrepancies(probes: &[sanbench::orchestrator::ProbeRecord]) -> Vec<String> {
    let games = probe_fixture_games();
    let truth = probe_truth();
    let mut problems = Vec::new();
    if probes.len() != truth.len() {
        problems.push(format!("{} probes, {} expected", probes.len(), truth.len()));
    }
    for (p, t) in probes.iter().zip(&truth) {
        let id = p.game_id;
        if id != t.game_id {
            problems.push(format!("probe for game {id}, expected game {}", t.game_id));
            continue;
        }
        let fraction = p.cut as f64 / p.original_plies as f64;
        if p.cut % 2 != 1 || !(0.3..=0.7).contains(&fraction) {
            problems.push(format!("game {id}: cut {} of {}", p.cut, p.original_plies));
        }
        // replay the prefix on the reference board
        let g = games.iter().find(|g| g.game_id == id).unwrap();
        let mut pos = OraclePosition::startpos();
        for ply in &g.plies[..p.cut] {
            let uci = pos.legal_moves().into_iter().find(|m| pos.san(m) == ply.san).unwrap();
            pos = pos.make_uci(&uci);
        }
        if pos.white_to_move() || pos.to_fen() != p.fen {
            problems.push(format!("game {id}: probe position {} vs replay {}", p.fen, pos.to_fen()));
        }
        if p.next_move != g.plies[p.cut].san {
            problems.push(format!("game {id}: next move {}", p.next_move));
        }
        let named: Vec<String> = {
            let legal: Vec<String> = pos.legal_moves().iter().map(|m| pos.san(m)).collect();
            p.suggestions.iter().filter(|s| legal.contains(s)).cloned().collect()
        };
        if named != t.suggestions {
            problems.push(format!("game {id}: legal suggestions {named:?}, expected {:?}", t.suggestions));
        }
        if (p.alignment, p.suggestions_valid) != (t.aligned, t.valid) {
            problems.push(format!(
                "game {id}: aligned/valid {}/{}, expected {}/{}",
                p.alignment, p.suggestions_valid, t.aligned, t.valid
            ));
        }
    }
    problems
}

/// Library metrics against [`brute_force`], per game and in aggregate.
pub fn metrics_discrepancies(records: &[GameRecord]) -> Vec<String> {
    use sanbench::metrics::{aggregate, game_metrics, pearson, AggregateOptions, BeCheckpoint};
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-9,
        (None, None) => true,
        _ => false,
    };
    let mut problems = Vec::new();
    let mut brutes = Vec::new();
    for g in records {
        let b = brute_force(g);
        let m = game_metrics(g, 20, BeCheckpoint::ModelMove).unwrap();
        let id = g.game_id;
        if b.verdict_mismatches > 0 {
            problems.push(format!("game {id}: {} verdicts disagree with the reference board", b.verdict_mismatches));
        }
        for (name, lib, brute) in [
            ("IMR", Some(m.imr), Some(b.imr)),
            ("RBLM", m.rblm, b.rblm),
            ("GL", Some(m.gl as f64), Some(b.gl as f64)),
            ("MRS", m.mrs, b.mrs),
            ("BE", m.be_full, b.be_full),
            ("BE20", m.be_checkpoint, b.be20),
        ] {
            if !close(lib, brute) {
                problems.push(format!("game {id}: {name} {lib:?}, brute force {brute:?}"));
            }
        }
        brutes.push((g.termination, b));
    }
    let summary = aggregate(records, AggregateOptions::default()).unwrap();
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let uncapped = || brutes.iter().filter(|(t, _)| *t != Termination::MoveCap).map(|(_, b)| b);
    for (name, lib, brute) in [
        ("mean IMR", summary.imr.mean, mean(brutes.iter().map(|(_, b)| b.imr).collect())),
        ("mean RBLM", summary.rblm.mean, mean(brutes.iter().filter_map(|(_, b)| b.rblm).collect())),
        ("mean GL", summary.gl.mean, mean(uncapped().map(|b| b.gl as f64).collect())),
        ("mean MRS", summary.mrs.mean, mean(brutes.iter().filter_map(|(_, b)| b.mrs).collect())),
        ("mean BE", summary.be_full.mean, mean(uncapped().filter_map(|b| b.be_full).collect())),
    ] {
        if !close(lib, brute) {
            problems.push(format!("{name} {lib:?}, brute force {brute:?}"));
        }
    }
    let pairs: Vec<(f64, f64)> = brutes.iter().filter_map(|(_, b)| Some((b.rblm?, b.mrs?))).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if xs.len() >= 3 {
        let lib = pearson(&xs, &ys).unwrap();
        let naive = naive_pearson(&xs, &ys);
        if (lib - naive).abs() > 1e-9 {
            problems.push(format!("RBLM/MRS correlation {lib}, naive {naive}"));
        }
    }
    problems
}

/// Small worked examples with known answers.
pub fn metrics_hand_problems() -> Vec<String> {
    use sanbench::metrics::{imr, mrs, pearson, rblm};
    let mut problems = Vec::new();
    let mut expect = |what: &str, got: f64, want: f64| {
        if (got - want).abs() > 1e-12 {
            problems.push(format!("{what}: {got}, expected {want}"));
        }
    };
    // two offending moves in four; three illegal attempts between them
    let g = hand_game(&[&[], &["Ke2", "Ke2"], &[], &["Qxh7"]]);
    expect("IMR", imr(&g, 4).unwrap(), 0.5);
    expect("IMR over 2", imr(&g, 2).unwrap(), 0.5);
    expect("RBLM", rblm(&g, 4).unwrap().unwrap(), 1.5);
    expect("MRS", mrs(&g).unwrap(), 1.0);
    let g = hand_game(&[&["Nf6", "Nf6", "e6"]]);
    expect("MRS of a repeat and a variant", mrs(&g).unwrap(), 5.0 / 9.0);
    let g = hand_game(&[&["a", "b", "c", "d"], &["x", "x+", " x "]]);
    expect("MRS with normalised text", mrs(&g).unwrap(), (0.25 + 1.0) / 2.0);
    expect("pearson", pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5);
    expect("pearson, perfect inverse", pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    let clean = hand_game(&[&[], &[]]);
    if rblm(&clean, 2).unwrap().is_some() || mrs(&clean).is_some() {
        problems.push("clean game should leave RBLM and MRS undefined".into());
    }
    problems
}

// ---- the game loop and its prompts

pub const INITIAL_PROMPT: &str = "I want you to act as a rival chess player. I will start as white, and we will say our moves in reciprocal order. After my first message, I will just write my move. Please don't explain your decision and just reply with your move.";

pub fn seed_with_opening(opening: &str) -> u64 {
    (0..).find(|&s| sanbench::orchestrator::opening_for_seed(s) == opening).unwrap()
}

pub fn scripted_chat(lines: &[&[&str]]) -> MockFactory {
    use sanbench::chat::ScriptedAdapter;
    let slots = lines.iter().map(|alts| alts.iter().map(|s| s.to_string()).collect()).collect();
    MockFactory::new(MockChat::Script(ScriptedAdapter::new(slots)))
}

pub fn subprocess_engine() -> sanbench::engine::UciEngine {
    use sanbench::engine::{EngineConfig, SearchLimit, UciEngine};
    UciEngine::start(EngineConfig {
        path: env!("CARGO_BIN_EXE_sanbench").into(),
        args: vec!["fake-engine".into()],
        limit: SearchLimit::Depth(2),
        timeout_ms: 10_000,
        ..EngineConfig::default()
    })
    .unwrap()
}

fn user_texts(t: &sanbench::orchestrator::TranscriptRecord) -> Vec<String> {
    t.messages.iter().filter(|m| m.role == sanbench::chat::Role::User).map(|m| m.content.clone()).collect()
}

/// Runs the scripted end-to-end games and reports every deviation from the
/// expected loop behaviour and prompt bytes.
pub fn protocol_problems() -> Vec<String> {
    use sanbench::engine::fake::ScriptedEngine;
    use sanbench::report::export_pgn;
    let mut problems = Vec::new();
    let mut check = |what: &str, ok: bool, detail: String| {
        if !ok {
            problems.push(format!("{what}: {detail}"));
        }
    };
    let settings = GameSettings::default();
    let illegal10: Vec<&str> = vec!["Kh1", "Kh2", "Kh3", "Kh4", "Kh5", "Kh6", "Kh7", "Kh8", "Ka1", "Ka2"];

    // the baseline loop against the engine subprocess: two moves, then ten refusals
    let chat = scripted_chat(&[&["e5"], &["Nc6"], &illegal10]);
    let mut engine = subprocess_engine();
    let (record, transcript) = sanbench::orchestrator::play_game(&variation(VariationId::Baseline), 0, 5, &mut engine, &chat, settings);
    check("baseline termination", record.termination == Termination::IllegalLimit, format!("{:?}", record.termination));
    check("baseline legal moves", record.n_legal == 2, record.n_legal.to_string());
    let last = record.attempts.last().unwrap();
    check("terminal attempts", (last.attempts.len(), last.r, last.p) == (10, 10, 1), format!("{} attempts", last.attempts.len()));
    check(
        "terminal attempts all illegal",
        last.attempts.iter().all(|a| a.verdict != Verdict::Legal),
        format!("{:?}", last.attempts.iter().map(|a| a.verdict).collect::<Vec<_>>()),
    );
    check("resampled replies", transcript.rejected.len() == 9, format!("{:?}", transcript.rejected));
    let white: Vec<String> = record.plies.iter().step_by(2).map(|p| p.san.clone()).collect();
    let mut want = vec![format!("{INITIAL_PROMPT}\n\n{}", record.opening)];
    want.extend(white[1..].iter().map(|s| format!("Move: {s}")));
    check("baseline prompts", user_texts(&transcript) == want, format!("{:?} vs {want:?}", user_texts(&transcript)));

    // reminders accumulate within a move
    let chat = scripted_chat(&[&["d5"], &["Na6"], &["Nc5"], &["b2", "c5", "Bxd7"], &illegal10]);
    let mut engine = ScriptedEngine::new(["Ne5", "a3", "Nd7", "h3"]);
    let (record, transcript) =
        sanbench::orchestrator::play_game(&variation(VariationId::MoveIlgRem), 0, seed_with_opening("Nf3"), &mut engine, &chat, settings);
    check("reminder termination", record.termination == Termination::IllegalLimit, format!("{:?}", record.termination));
    let mut want: Vec<String> = vec![
        format!("{INITIAL_PROMPT}\n\nNf3"),
        "Move: Ne5".into(),
        "Move: a3".into(),
        "Move: Nd7".into(),
        "Move: Nd7 (moves b2 are illegal).".into(),
        "Move: Nd7 (moves b2, c5 are illegal).".into(),
        "Move: h3".into(),
    ];
    for k in 1..10 {
        want.push(format!("Move: h3 (moves {} are illegal).", illegal10[..k].join(", ")));
    }
    check("reminder prompts", user_texts(&transcript) == want, format!("{:#?}", user_texts(&transcript)));
    check("reminder terminal attempts", record.attempts.last().unwrap().attempts.len() == 10, String::new());

    // a legal game to mate
    let chat = scripted_chat(&[&["e5"], &["Nc6"], &["d6"], &["Qh4#"]]);
    let mut engine = ScriptedEngine::new(["Ng1", "f3", "g4"]);
    let (record, transcript) =
        sanbench::orchestrator::play_game(&variation(VariationId::Baseline), 0, seed_with_opening("Nf3"), &mut engine, &chat, settings);
    check("mate termination", record.termination == Termination::Checkmate, format!("{:?} {:?}", record.termination, record.error));
    let pgn = export_pgn(&record).unwrap();
    check("PGN result", pgn.contains("[Result \"0-1\"]") && pgn.trim_end().ends_with("0-1"), pgn.clone());
    check("PGN moves", pgn.contains("1. Nf3 e5 2. Ng1 Nc6 3. f3 d6 4. g4 Qh4#"), pgn.clone());
    let want = vec![format!("{INITIAL_PROMPT}\n\nNf3"), "Move: Ng1".into(), "Move: f3".into(), "Move: g4".into()];
    check("mate prompts", user_texts(&transcript) == want, format!("{:?}", user_texts(&transcript)));

    // the board description prompt
    let chat = scripted_chat(&[&["e5"], &illegal10]);
    let mut engine = ScriptedEngine::new(["Nf3"]);
    let (_, transcript) =
        sanbench::orchestrator::play_game(&variation(VariationId::DscBase), 0, seed_with_opening("e4"), &mut engine, &chat, settings);
    let mut board = Board::startpos();
    for san in ["e4", "e5", "Nf3"] {
        board = board.apply(&sanbench_rules::parse_san(&board, san).unwrap()).unwrap();
    }
    let description = describe_board(&board);
    let want = format!(
        "Move: Nf3\nAfter my move, the board state is a follows:\n{}\n\nPlease reply with your next move.",
        description.trim_end()
    );
    let texts = user_texts(&transcript);
    check("description prompt", texts.get(1) == Some(&want), format!("{:?}", texts.get(1)));
    check("description content", describe_discrepancies(&board).0.is_empty(), String::new());

    // the other opening prompts
    let base = format!("{INITIAL_PROMPT}\n\nd4");
    let illegal = sanbench::prompts::initial_prompt(&variation(VariationId::IntIllegal), "d4").unwrap();
    check("no-illegal prompt", illegal == format!("{base}\n\nPlease do not make illegal moves"), illegal.clone());
    problems
}

pub fn reference_records() -> Vec<GameRecord> {
    let chat = MockFactory::new(MockChat::Synthetic(SyntheticProfile::reference_population()));
    run_experiment(
        &variation(VariationId::Baseline),
        REFERENCE_GAMES,
        1,
        REFERENCE_SEED,
        GameSettings::default(),
        &builtin_engines(),
        &chat,
        |_, _| Ok(()),
    )
    .unwrap()
}

/// Aggregates of the reference run that have no closed form: the engine's
/// evaluations depend on the moves played. Pinned from a verified run.
pub const REFERENCE_BE_FULL: f64 = 354.2058333333333;
pub const REFERENCE_BE20: f64 = 1758.5;
pub const REFERENCE_BE20_GAMES: usize = 10;

/// The reference run against its hand-derived and pinned values, plus the
/// reprint of the published table.
pub fn reference_problems() -> Vec<String> {
    use sanbench::metrics::{aggregate, game_metrics, AggregateOptions, BeCheckpoint};
    use sanbench::report::{build_report, summary_markdown};
    let records = reference_records();
    let mut problems = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let plans = reference_plan_values();
    for g in &records {
        if g.termination != Termination::IllegalLimit {
            problems.push(format!("game {} ended by {:?}", g.game_id, g.termination));
            continue;
        }
        let m = game_metrics(g, 20, BeCheckpoint::ModelMove).unwrap();
        let (imr, rblm, gl, mrs) = plans[g.game_id as usize % plans.len()];
        let got = (m.imr, m.rblm.unwrap_or(f64::NAN), m.gl as f64, m.mrs.unwrap_or(f64::NAN));
        if !(close(got.0, imr) && close(got.1, rblm) && close(got.2, gl) && close(got.3, mrs)) {
            problems.push(format!("game {}: {got:?}, expected {:?}", g.game_id, (imr, rblm, gl, mrs)));
        }
    }
    let s = aggregate(&records, AggregateOptions::default()).unwrap();
    let (imr, rblm, gl, mrs) = reference_means();
    for (name, got, want) in [
        ("IMR", s.imr.mean, imr),
        ("RBLM", s.rblm.mean, rblm),
        ("GL", s.gl.mean, gl),
        ("MRS", s.mrs.mean, mrs),
        ("BE full", s.be_full.mean, REFERENCE_BE_FULL),
        ("BE20", s.be_checkpoint.mean, REFERENCE_BE20),
    ] {
        if !got.is_some_and(|g| close(g, want)) {
            problems.push(format!("mean {name} {got:?}, expected {want}"));
        }
    }
    if s.be_checkpoint.n != REFERENCE_BE20_GAMES {
        problems.push(format!("{} games reached move 20", s.be_checkpoint.n));
    }
    let bundle = build_report(&records, &[], AggregateOptions::default()).unwrap();
    let md = summary_markdown(&bundle);
    for want in [
        "| Baseline | 40 | 0.35 | 4.75 | 10.50 | 1758.50 | 354.21 | 0.76 |",
        "| Baseline | 0.26 | 6.78 | 18.79 | 253.1 | 88.38 | 0.51 |",
        "(reference -0.86)",
    ] {
        if !md.contains(want) {
            problems.push(format!("summary lacks {want:?}"));
        }
    }
    problems
}

// ---- whole-pipeline determinism

pub fn determinism_manifest(parallelism: usize) -> sanbench::report::ExperimentManifest {
    use sanbench::report::{AdapterSpec, ExperimentManifest, MockSpec};
    let mut m = ExperimentManifest::new(VariationId::Baseline, 50, 4242);
    m.adapter = AdapterSpec::Mock(MockSpec::Synthetic { profile: random_profile(4242, 16) });
    m.settings.move_cap = 60;
    m.parallelism = parallelism;
    m.probe.sample = 10;
    m
}

/// Runs, probes and reports `manifest` into `out`.
pub fn full_run(manifest: &sanbench::report::ExperimentManifest, out: &Path) {
    use sanbench::pipeline::{probe_dir, report_dir, run_manifest};
    run_manifest(manifest, out, out).unwrap();
    probe_dir(manifest, out, out).unwrap();
    report_dir(out, manifest.report).unwrap();
}

/// Every file under `dir` by relative path, except the run manifest, which
/// carries wall-clock timestamps.
pub fn output_files(dir: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != sanbench::pipeline::MANIFEST_FILE {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn determinism_problems() -> Vec<String> {
    use sanbench::report::store;
    let mut problems = Vec::new();
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    full_run(&determinism_manifest(1), dirs[0].path());
    full_run(&determinism_manifest(1), dirs[1].path());
    full_run(&determinism_manifest(8), dirs[2].path());
    let (a, b) = (output_files(dirs[0].path()), output_files(dirs[1].path()));
    for ext in ["jsonl", "csv", "svg"] {
        if !a.keys().any(|p| p.extension().is_some_and(|e| e == ext)) {
            problems.push(format!("no .{ext} output"));
        }
    }
    if a.keys().ne(b.keys()) {
        problems.push(format!("file sets differ: {:?} vs {:?}", a.keys(), b.keys()));
    }
    for (path, bytes) in &a {
        if b.get(path) != Some(bytes) {
            problems.push(format!("{} differs between identical runs", path.display()));
        }
    }
    let sorted = |dir: &Path| {
        let mut games: Vec<String> = store::read_games(dir).unwrap().iter().map(|g| serde_json::to_string(g).unwrap()).collect();
        let mut transcripts: Vec<String> =
            store::read_transcripts(dir).unwrap().iter().map(|t| serde_json::to_string(t).unwrap()).collect();
        games.sort();
        transcripts.sort();
        (games, transcripts)
    };
    let (serial, parallel) = (sorted(dirs[0].path()), sorted(dirs[2].path()));
    if serial.0.len() != 50 {
        problems.push(format!("{} games recorded", serial.0.len()));
    }
    if serial != parallel {
        problems.push("parallel run recorded different games".into());
    }
    problems
}
