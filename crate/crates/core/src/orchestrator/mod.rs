//! Playing games: the attempt loop, experiments over many seeds, the
//! truncated-game probe and the post-hoc audit.

mod audit;
mod probe;
mod records;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sanbench_rules::{format_san, game_status, parse_san, Board, Color};

use crate::chat::{
    Annotation, ChatAdapter, ChatError, ChatMessage, ChatSession, FaithfulExtractor, HistoryPolicy, LiveAdapter,
    RetryPolicy, SamplingParams, ScriptedAdapter, SyntheticAdapter, SyntheticProfile,
};
use crate::engine::{sample_opening, sample_reply, Engine, EngineError};
use crate::extract::{default_shots, extract_direct, extract_llm, ExtractionResult, Shot};
use crate::prompts::{
    cot_prefix, initial_message, move_prompt, reminder_prompt, CotDecision, ExtractionMode, MoveContext, PromptError,
    ReasoningMode, RegenerationMode, VariationConfig,
};

pub use audit::{audit, AuditIssue};
pub use probe::{probe_cut, probe_prompt, run_probe, score_suggestions, ProbeSettings};
pub use records::*;

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error("writing records: {0}")]
    Sink(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameSettings {
    /// Attempts allowed per model move before the game is stopped.
    pub max_attempts: u32,
    /// Stop after this many legal model moves.
    pub move_cap: u32,
}

impl Default for GameSettings {
    fn default() -> Self {
        GameSettings { max_attempts: 10, move_cap: 200 }
    }
}

/// Makes the chat sessions a game or probe needs.
pub trait ChatFactory: Sync {
    /// The session that plays black in game `game_id`.
    fn player(&self, game_id: u64, seed: u64) -> Result<ChatSession, ChatError>;

    /// A fresh session for one move-extraction request.
    fn extractor(&self, game_id: u64, seed: u64) -> Result<ChatSession, ChatError>;

    /// The session answering the `index`-th probe prompt.
    fn probe(&self, index: usize, seed: u64) -> Result<ChatSession, ChatError> {
        self.player(index as u64, seed)
    }

    fn shots(&self) -> Vec<Shot> {
        default_shots()
    }
}

/// Offline stand-ins for the chat model.
#[derive(Debug, Clone)]
pub enum MockChat {
    /// Every game replays the same script from its first line; probe `i`
    /// is answered by line `i`.
    Script(ScriptedAdapter),
    Synthetic(SyntheticProfile),
}

#[derive(Debug, Clone)]
pub struct MockFactory {
    pub chat: MockChat,
    pub params: SamplingParams,
}

impl MockFactory {
    pub fn new(chat: MockChat) -> Self {
        MockFactory { chat, params: SamplingParams::default() }
    }

    fn session(&self, adapter: Box<dyn ChatAdapter>) -> Result<ChatSession, ChatError> {
        Ok(ChatSession::new(self.params.clone(), adapter)?.with_retry(RetryPolicy { max_retries: 5, backoff_ms: 0 }))
    }
}

impl ChatFactory for MockFactory {
    fn player(&self, game_id: u64, seed: u64) -> Result<ChatSession, ChatError> {
        match &self.chat {
            MockChat::Script(s) => self.session(Box::new(s.clone())),
            MockChat::Synthetic(p) => self.session(Box::new(SyntheticAdapter::new(p.clone(), game_id as usize, seed))),
        }
    }

    fn extractor(&self, _game_id: u64, _seed: u64) -> Result<ChatSession, ChatError> {
        self.session(Box::new(FaithfulExtractor))
    }

    fn probe(&self, index: usize, seed: u64) -> Result<ChatSession, ChatError> {
        match &self.chat {
            MockChat::Script(s) => {
                let line = s.slots().get(index).cloned().unwrap_or_default();
                self.session(Box::new(ScriptedAdapter::new(vec![line])))
            }
            MockChat::Synthetic(_) => self.player(index as u64, seed),
        }
    }
}

/// Sessions against a chat completion endpoint. The extractor uses the
/// same endpoint with the same sampling parameters.
#[derive(Debug, Clone)]
pub struct LiveFactory {
    pub adapter: LiveAdapter,
    pub params: SamplingParams,
    pub retry: RetryPolicy,
}

impl ChatFactory for LiveFactory {
    fn player(&self, _game_id: u64, _seed: u64) -> Result<ChatSession, ChatError> {
        Ok(ChatSession::new(self.params.clone(), Box::new(self.adapter.clone()))?.with_retry(self.retry))
    }

    fn extractor(&self, game_id: u64, seed: u64) -> Result<ChatSession, ChatError> {
        self.player(game_id, seed)
    }
}

/// Seed of game `index` under `master`.
pub fn game_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// The opening white plays in a game with this seed.
pub fn opening_for_seed(seed: u64) -> &'static str {
    sample_opening(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Why a game stopped without a chess or harness termination.
enum Stop {
    Failed(String),
}

impl From<ChatError> for Stop {
    fn from(e: ChatError) -> Self {
        Stop::Failed(format!("chat: {e}"))
    }
}

impl From<EngineError> for Stop {
    fn from(e: EngineError) -> Self {
        Stop::Failed(format!("engine: {e}"))
    }
}

impl From<PromptError> for Stop {
    fn from(e: PromptError) -> Self {
        Stop::Failed(format!("prompt: {e}"))
    }
}

struct Game<'a> {
    config: &'a VariationConfig,
    settings: GameSettings,
    game_id: u64,
    seed: u64,
    chat: &'a dyn ChatFactory,
    shots: Vec<Shot>,
    engine: &'a mut dyn Engine,
    session: ChatSession,
    board: Board,
    history: Vec<Board>,
    record: GameRecord,
}

impl Game<'_> {
    fn push_ply(&mut self, next: Board, san: String) -> Result<Option<Termination>, EngineError> {
        let mover = self.board.turn();
        self.history.push(self.board);
        self.board = next;
        self.record.plies.push(Ply { san, mover });
        let cp = self.engine.evaluate(&self.board)?;
        self.record.ply_evaluations.push(cp);
        if mover == Color::Black {
            self.record.evaluations.push(cp);
        }
        Ok(Termination::from_status(game_status(&self.board, &self.history)))
    }

    fn extract(&self, raw: &str) -> Result<ExtractionResult, ChatError> {
        match self.config.extraction {
            ExtractionMode::Direct => Ok(extract_direct(raw)),
            ExtractionMode::LlmAssisted => {
                let mut fresh = || self.chat.extractor(self.game_id, self.seed);
                extract_llm(raw, &self.shots, &mut fresh)
            }
        }
    }

    /// One model move, from the first request to a legal move or the
    /// attempt limit.
    fn model_move(&mut self, pending: ChatMessage, white_san: &str) -> Result<MoveAttemptLog, Stop> {
        let index = self.record.attempts.len() as u32 + 1;
        let mut log = MoveAttemptLog::new(index, self.board.to_fen());
        let decision = cot_prefix(self.config, self.session.transcript());
        log.cot = match decision {
            CotDecision::Inject(_) => Some(CotBranch::Injected),
            CotDecision::Emulated => Some(CotBranch::Emulated),
            CotDecision::NotApplicable => None,
        };
        let prefix = decision.prefix();
        let mut illegal: Vec<String> = Vec::new();
        let mut raw = self.session.complete(vec![pending], prefix)?;
        loop {
            let extraction = self.extract(&raw)?;
            let verdict = Verdict::judge(&self.board, extraction.candidate.as_deref());
            log.attempts.push(Attempt {
                raw: raw.clone(),
                extracted: extraction.candidate.clone(),
                verdict,
                method: extraction.method,
                extractor_reply: extraction.extractor_reply,
                fallback: extraction.fallback,
            });
            if verdict == Verdict::Legal {
                let candidate = extraction.candidate.expect("legal verdicts have a candidate");
                let mv = parse_san(&self.board, &candidate).expect("judged legal");
                log.final_san = Some(format_san(&self.board, &mv).expect("judged legal"));
                break;
            }
            if log.attempts.len() as u32 >= self.settings.max_attempts {
                break;
            }
            let text = extraction.candidate.unwrap_or_else(|| raw.trim().to_string());
            if !illegal.contains(&text) {
                illegal.push(text);
            }
            raw = match self.config.regeneration {
                RegenerationMode::Resample => self.session.regenerate()?,
                RegenerationMode::ReminderAppend => {
                    let reminder = reminder_prompt(self.config, white_san, &illegal)?
                        .ok_or_else(|| Stop::Failed("reminder regeneration needs a reminder template".into()))?;
                    let message = ChatMessage::user(reminder).tagged(Annotation::Reminder);
                    self.session.retry_with(vec![message], prefix)?
                }
            };
        }
        log.settle();
        Ok(log)
    }

    fn play(&mut self) -> Result<Termination, Stop> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let opening = sample_opening(&mut rng);
        self.record.opening = opening.to_string();
        self.engine.new_game()?;
        let mv = parse_san(&self.board, opening).expect("openings are legal from the start");
        let next = self.board.apply(&mv).expect("legal");
        if let Some(t) = self.push_ply(next, opening.to_string())? {
            return Ok(t);
        }
        let mut pending = initial_message(self.config, opening)?;
        let mut white_san = opening.to_string();
        loop {
            if self.record.n_legal >= self.settings.move_cap {
                return Ok(Termination::MoveCap);
            }
            if let Some(policy) = policy_before_send(self.config.history, pending.annotation) {
                self.session.prune(policy);
            }
            let log = self.model_move(pending, &white_san)?;
            let final_san = log.final_san.clone();
            self.record.attempts.push(log);
            let Some(san) = final_san else {
                return Ok(Termination::IllegalLimit);
            };
            if self.config.reasoning != ReasoningMode::None {
                self.session.annotate_last_reply(Annotation::Reasoning, Some(san.clone()));
                self.session.prune(self.config.history);
            }
            self.record.n_legal += 1;
            let mv = parse_san(&self.board, &san).expect("canonical SAN");
            let next = self.board.apply(&mv).expect("legal");
            if let Some(t) = self.push_ply(next, san)? {
                return Ok(t);
            }

            let (reply, candidates) = sample_reply(&mut *self.engine, &self.board, &mut rng)?;
            let reply_san = format_san(&self.board, &reply).map_err(|e| Stop::Failed(format!("engine: {e}")))?;
            let candidates = candidates
                .iter()
                .map(|c| Candidate {
                    san: format_san(&self.board, &c.mv).unwrap_or_else(|_| c.mv.to_uci()),
                    rank: c.rank,
                    score: c.score,
                })
                .collect();
            self.record.engine_replies.push(EngineReply {
                ply: self.record.plies.len(),
                candidates,
                chosen: reply_san.clone(),
            });
            let next = self.board.apply(&reply).map_err(|e| Stop::Failed(format!("engine: {e}")))?;
            if let Some(t) = self.push_ply(next, reply_san.clone())? {
                return Ok(t);
            }

            let sans = self.record.sans();
            let text = move_prompt(self.config, MoveContext { san: &reply_san, plies: &sans, board: &self.board })?;
            pending = if self.config.describes_board() {
                ChatMessage::user(text)
                    .tagged(Annotation::Description)
                    .with_condensed(format!("Move: {reply_san}"))
            } else {
                ChatMessage::user(text).tagged(Annotation::MovePrompt)
            };
            white_san = reply_san;
        }
    }
}

/// Policy to apply before sending a message with this tag, so that the
/// kept count includes the message about to go out.
fn policy_before_send(policy: HistoryPolicy, tag: Option<Annotation>) -> Option<HistoryPolicy> {
    match (policy, tag) {
        (HistoryPolicy::KeepDescription(n), Some(Annotation::Description)) => {
            Some(HistoryPolicy::KeepDescription(n.saturating_sub(1)))
        }
        _ => None,
    }
}

/// Plays one game of `config` and returns its record and transcript.
/// Chat and engine failures end the game with a transport-failure record.
pub fn play_game(
    config: &VariationConfig,
    game_id: u64,
    seed: u64,
    engine: &mut dyn Engine,
    chat: &dyn ChatFactory,
    settings: GameSettings,
) -> (GameRecord, TranscriptRecord) {
    let record = GameRecord {
        schema_version: SCHEMA_VERSION,
        game_id,
        variation: config.id,
        config_hash: config.config_hash(),
        opening: String::new(),
        seed,
        plies: Vec::new(),
        attempts: Vec::new(),
        evaluations: Vec::new(),
        ply_evaluations: Vec::new(),
        engine_replies: Vec::new(),
        termination: Termination::TransportFailure,
        n_legal: 0,
        transcript_ref: format!("game-{game_id}"),
        error: None,
    };
    let session = match chat.player(game_id, seed) {
        Ok(s) => s,
        Err(e) => {
            let mut record = record;
            record.error = Some(format!("chat: {e}"));
            let transcript = TranscriptRecord {
                schema_version: SCHEMA_VERSION,
                game_id,
                messages: Vec::new(),
                rejected: Vec::new(),
                events: Vec::new(),
            };
            return (record, transcript);
        }
    };
    let mut game = Game {
        config,
        settings,
        game_id,
        seed,
        chat,
        shots: chat.shots(),
        engine,
        session,
        board: Board::startpos(),
        history: Vec::new(),
        record,
    };
    match game.play() {
        Ok(t) => game.record.termination = t,
        Err(Stop::Failed(e)) => {
            game.record.termination = Termination::TransportFailure;
            game.record.error = Some(e);
        }
    }
    let transcript = TranscriptRecord {
        schema_version: SCHEMA_VERSION,
        game_id,
        messages: game.session.transcript().to_vec(),
        rejected: game.session.rejected().to_vec(),
        events: game.session.events().to_vec(),
    };
    (game.record, transcript)
}

/// Makes one engine per worker.
pub type EngineFactory<'a> = dyn Fn() -> Result<Box<dyn Engine>, EngineError> + Sync + 'a;

/// Plays `n_games` games with seeds derived from `seed`, on up to
/// `parallelism` threads. Records reach `sink` in game-id order whatever
/// the parallelism, so the output is the same for any thread count.
pub fn run_experiment(
    config: &VariationConfig,
    n_games: usize,
    parallelism: usize,
    seed: u64,
    settings: GameSettings,
    engines: &EngineFactory<'_>,
    chat: &dyn ChatFactory,
    mut sink: impl FnMut(&GameRecord, &TranscriptRecord) -> std::io::Result<()>,
) -> Result<Vec<GameRecord>, OrchestratorError> {
    if n_games == 0 {
        return Err(OrchestratorError::Invalid("an experiment needs at least one game".into()));
    }
    config.validate()?;
    let workers = parallelism.clamp(1, n_games);
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Result<(usize, GameRecord, TranscriptRecord), EngineError>>();
    let mut out = Vec::with_capacity(n_games);
    let mut failure = None;
    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || {
                let mut engine = match engines() {
                    Ok(e) => e,
                    Err(e) => {
                        next.store(n_games, Ordering::SeqCst);
                        let _ = tx.send(Err(e));
                        return;
                    }
                };
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= n_games {
                        break;
                    }
                    let (record, transcript) =
                        play_game(config, i as u64, game_seed(seed, i as u64), &mut engine, chat, settings);
                    if tx.send(Ok((i, record, transcript))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        let mut waiting = BTreeMap::new();
        let mut emitted = 0;
        for msg in rx {
            match msg {
                Err(e) => {
                    failure.get_or_insert(OrchestratorError::Engine(e));
                }
                Ok((i, record, transcript)) => {
                    waiting.insert(i, (record, transcript));
                }
            }
            while let Some((record, transcript)) = waiting.remove(&emitted) {
                if failure.is_none() {
                    if let Err(e) = sink(&record, &transcript) {
                        failure = Some(OrchestratorError::Sink(e));
                        next.store(n_games, Ordering::SeqCst);
                    }
                }
                out.push(record);
                emitted += 1;
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
