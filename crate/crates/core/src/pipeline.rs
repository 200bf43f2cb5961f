//! Manifest-driven runs over an output directory: play, probe, report and
//! validate. The command-line tool is a thin layer over these.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::chat::{ChatError, LiveAdapter, ScriptedAdapter, SyntheticProfile};
use crate::engine::fake::FakeEngine;
use crate::engine::{Engine, EngineError, UciEngine};
use crate::orchestrator::{
    audit, run_experiment, run_probe, AuditIssue, ChatFactory, GameRecord, LiveFactory, MockChat, MockFactory,
    OrchestratorError, ProbeRecord,
};
use crate::report::store::{self, ExperimentLog, JsonlSink, StoreError, PROBES_FILE};
use crate::report::{build_report, write_bundle, AdapterSpec, EngineSpec, ExperimentManifest, ManifestError, MockSpec, ReportBundle, ReportError};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const REPORT_DIR: &str = "report";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Starts the engine a manifest asks for.
pub fn start_engine(spec: &EngineSpec) -> Result<Box<dyn Engine>, EngineError> {
    Ok(match spec {
        EngineSpec::Builtin { depth } => Box::new(FakeEngine::new(*depth)),
        EngineSpec::Uci(cfg) => Box::new(UciEngine::start(cfg.clone())?),
    })
}

/// Builds the chat side. Script paths are resolved against `base`.
pub fn chat_factory(spec: &AdapterSpec, base: &Path) -> Result<Box<dyn ChatFactory>, ChatError> {
    Ok(match spec {
        AdapterSpec::Mock(MockSpec::Reference) => {
            Box::new(MockFactory::new(MockChat::Synthetic(SyntheticProfile::reference_population())))
        }
        AdapterSpec::Mock(MockSpec::Synthetic { profile }) => Box::new(MockFactory::new(MockChat::Synthetic(profile.clone()))),
        AdapterSpec::Mock(MockSpec::Script { path }) => {
            Box::new(MockFactory::new(MockChat::Script(ScriptedAdapter::from_path(&base.join(path))?)))
        }
        AdapterSpec::Live { endpoint, sampling, retry } => Box::new(LiveFactory {
            adapter: LiveAdapter::new(endpoint.clone())?,
            params: sampling.clone(),
            retry: *retry,
        }),
    })
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<GameRecord>,
    pub games_path: PathBuf,
}

/// Plays the manifest's games into `out`: `games.jsonl`,
/// `transcripts.jsonl` and a copy of the manifest with run times filled in.
pub fn run_manifest(manifest: &ExperimentManifest, base: &Path, out: &Path) -> Result<RunOutcome, PipelineError> {
    manifest.validate()?;
    let chat = chat_factory(&manifest.adapter, base)?;
    let log = ExperimentLog::create(out)?;
    let mut stamped = manifest.clone();
    stamped.started_unix = Some(unix_now());
    let manifest_path = out.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, stamped.to_toml()).map_err(io_at(&manifest_path))?;
    let engines = || start_engine(&manifest.engine);
    let records = run_experiment(
        &manifest.variation,
        manifest.games,
        manifest.parallelism,
        manifest.seed,
        manifest.settings,
        &engines,
        chat.as_ref(),
        |record, transcript| log.persist_game(record, transcript),
    )?;
    stamped.finished_unix = Some(unix_now());
    std::fs::write(&manifest_path, stamped.to_toml()).map_err(io_at(&manifest_path))?;
    Ok(RunOutcome { records, games_path: out.join(store::GAMES_FILE) })
}

/// Probes the games stored in `out` and writes `probes.jsonl`.
pub fn probe_dir(manifest: &ExperimentManifest, base: &Path, out: &Path) -> Result<Vec<ProbeRecord>, PipelineError> {
    let records = store::read_games(out)?;
    let chat = chat_factory(&manifest.adapter, base)?;
    let mut engine = start_engine(&manifest.engine)?;
    let probes = run_probe(&records, manifest.probe, engine.as_mut(), chat.as_ref())?;
    let path = out.join(PROBES_FILE);
    let file = std::fs::File::create(&path).map_err(io_at(&path))?;
    let sink = JsonlSink::new(file);
    for p in &probes {
        sink.append(p).map_err(io_at(&path))?;
    }
    Ok(probes)
}

/// Builds the report from the logs in `out` and writes it to `out/report`.
pub fn report_dir(out: &Path, options: crate::metrics::AggregateOptions) -> Result<(ReportBundle, Vec<PathBuf>), PipelineError> {
    let records = store::read_games(out)?;
    let probes = if out.join(PROBES_FILE).exists() { store::read_probes(out)? } else { Vec::new() };
    let bundle = build_report(&records, &probes, options)?;
    let dir = out.join(REPORT_DIR);
    let files = write_bundle(&bundle, &probes, &dir).map_err(io_at(&dir))?;
    Ok((bundle, files))
}

/// Audits every stored game; returns the number of games and all issues.
pub fn validate_dir(out: &Path) -> Result<(usize, Vec<AuditIssue>), PipelineError> {
    let records = store::read_games(out)?;
    let issues = records.iter().flat_map(audit).collect();
    Ok((records.len(), issues))
}

/// The manifest stored next to a run's logs.
pub fn stored_manifest(out: &Path) -> Result<ExperimentManifest, PipelineError> {
    Ok(ExperimentManifest::load(&out.join(MANIFEST_FILE))?)
}
