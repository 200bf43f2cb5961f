use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sanbench::engine::{fake, EngineConfig};
use sanbench::pipeline::{self, PipelineError};
use sanbench::prompts::VariationId;
use sanbench::report::store;
use sanbench::report::{annotated_transcript, export_pgn, AdapterSpec, EngineSpec, ExperimentManifest, MockSpec};

#[derive(Parser)]
#[command(name = "sanbench", version, about = "Chess games between a chat model and a UCI engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdapterKind {
    Live,
    Mock,
}

#[derive(Subcommand)]
enum Command {
    /// Play the games a manifest describes.
    Run {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Variation to run when no manifest is given.
        #[arg(long, value_parser = parse_variation)]
        variation: Option<VariationId>,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, value_enum)]
        adapter: Option<AdapterKind>,
        /// Reply script for the mock adapter.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        /// `builtin`, `self` (this binary's UCI mode) or a UCI engine path.
        #[arg(long)]
        engine: Option<String>,
    },
    /// Build the report bundle from a run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Ask mid-game questions about stored games.
    Probe {
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the manifest stored in the run directory.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Print one game as PGN followed by its transcript.
    Replay {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        game: u64,
    },
    /// Re-judge every recorded attempt.
    Validate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Speak UCI on stdin/stdout with the built-in search.
    #[command(hide = true)]
    FakeEngine {
        /// Replay a canned transcript instead of searching.
        #[arg(long)]
        script: Option<PathBuf>,
    },
}

fn parse_variation(s: &str) -> Result<VariationId, String> {
    VariationId::ALL
        .into_iter()
        .find(|v| v.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown variation {s}"))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Store(#[from] store::StoreError),
    #[error("{0}")]
    Other(String),
}

fn engine_spec(arg: &str) -> Result<EngineSpec, CliError> {
    Ok(match arg {
        "builtin" => EngineSpec::default(),
        "self" => {
            let exe = std::env::current_exe().map_err(|e| CliError::Other(format!("cannot locate this binary: {e}")))?;
            EngineSpec::Uci(EngineConfig { path: exe, args: vec!["fake-engine".into()], ..EngineConfig::default() })
        }
        path => EngineSpec::Uci(EngineConfig { path: path.into(), ..EngineConfig::default() }),
    })
}

#[allow(clippy::too_many_arguments)]
fn run(
    manifest: Option<PathBuf>,
    variation: Option<VariationId>,
    games: Option<usize>,
    out: &Path,
    seed: Option<u64>,
    parallelism: Option<usize>,
    adapter: Option<AdapterKind>,
    mock_script: Option<PathBuf>,
    engine: Option<String>,
) -> Result<(), CliError> {
    let cwd = PathBuf::from(".");
    let (mut m, base) = match (&manifest, variation) {
        (Some(path), _) => {
            let m = ExperimentManifest::load(path).map_err(PipelineError::from)?;
            (m, path.parent().map_or(cwd, Path::to_path_buf))
        }
        (None, Some(v)) => (ExperimentManifest::new(v, games.unwrap_or(50), 0), cwd),
        (None, None) => return Err(CliError::Other("give --manifest or --variation".into())),
    };
    if let Some(g) = games {
        m.games = g;
    }
    if let Some(s) = seed {
        m.seed = s;
    }
    if let Some(p) = parallelism {
        m.parallelism = p;
    }
    if let Some(e) = engine {
        m.engine = engine_spec(&e)?;
    }
    match (adapter, mock_script) {
        (Some(AdapterKind::Live), Some(_)) => return Err(CliError::Other("--mock-script needs the mock adapter".into())),
        (_, Some(script)) => {
            // relative to where the command was run, not to the manifest
            let cwd = std::env::current_dir().map_err(|e| CliError::Other(e.to_string()))?;
            let path = cwd.join(script);
            m.adapter = AdapterSpec::Mock(MockSpec::Script { path });
        }
        (Some(AdapterKind::Mock), None) if !matches!(m.adapter, AdapterSpec::Mock(_)) => {
            m.adapter = AdapterSpec::Mock(MockSpec::Reference);
        }
        (Some(AdapterKind::Live), None) if !matches!(m.adapter, AdapterSpec::Live { .. }) => {
            m.adapter = AdapterSpec::Live {
                endpoint: Default::default(),
                sampling: Default::default(),
                retry: Default::default(),
            };
        }
        _ => {}
    }
    let outcome = pipeline::run_manifest(&m, &base, out)?;
    let failures = outcome
        .records
        .iter()
        .filter(|r| r.termination == sanbench::orchestrator::Termination::TransportFailure)
        .count();
    println!("{} games written to {}", outcome.records.len(), outcome.games_path.display());
    if failures > 0 {
        println!("{failures} games ended with a transport failure");
    }
    Ok(())
}

fn replay(out: &Path, game: u64) -> Result<(), CliError> {
    let records = store::read_games(out)?;
    let record = records
        .iter()
        .find(|r| r.game_id == game)
        .ok_or_else(|| CliError::Other(format!("no game {game} in {}", out.display())))?;
    let pgn = export_pgn(record).map_err(|e| CliError::Other(e.to_string()))?;
    println!("{pgn}");
    if let Some(t) = store::read_transcripts(out)?.iter().find(|t| t.game_id == game) {
        println!("{}", annotated_transcript(t));
    }
    Ok(())
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run { manifest, variation, games, out, seed, parallelism, adapter, mock_script, engine } => {
            run(manifest, variation, games, &out, seed, parallelism, adapter, mock_script, engine)?;
        }
        Command::Report { out } => {
            let manifest = pipeline::stored_manifest(&out).ok();
            let options = manifest.map(|m| m.report).unwrap_or_default();
            let (bundle, files) = pipeline::report_dir(&out, options)?;
            print!("{}", sanbench::report::summary_markdown(&bundle));
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Probe { out, manifest } => {
            let (m, base) = match manifest {
                Some(p) => {
                    let m = ExperimentManifest::load(&p).map_err(PipelineError::from)?;
                    (m, p.parent().map_or(PathBuf::from("."), Path::to_path_buf))
                }
                None => (pipeline::stored_manifest(&out)?, PathBuf::from(".")),
            };
            let probes = pipeline::probe_dir(&m, &base, &out)?;
            let aligned = probes.iter().filter(|p| p.alignment).count();
            let valid = probes.iter().filter(|p| p.suggestions_valid).count();
            println!("{} probes: {aligned} aligned, {valid} with valid suggestions", probes.len());
        }
        Command::Replay { out, game } => replay(&out, game)?,
        Command::Validate { out } => {
            let (games, issues) = pipeline::validate_dir(&out)?;
            for issue in &issues {
                println!("{issue}");
            }
            println!("{games} games audited, {} issues", issues.len());
            if !issues.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::FakeEngine { script } => {
            let stdin = BufReader::new(io::stdin().lock());
            let stdout = io::stdout().lock();
            let served = match script {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
                    fake::serve_script(&text, stdin, stdout)
                }
                None => fake::serve(stdin, stdout),
            };
            served.map_err(|e| CliError::Other(e.to_string()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
