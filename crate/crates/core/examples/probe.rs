//! Cuts stored games part-way with black to move and asks for black's
//! move, scoring the suggestions against the game and the engine.
//!
//! ```text
//! cargo run -p sanbench --example probe
//! ```

use sanbench::chat::ScriptedAdapter;
use sanbench::engine::fake::FakeEngine;
use sanbench::engine::{Engine, EngineError};
use sanbench::orchestrator::{probe_cut, run_experiment, run_probe, GameSettings, MockChat, MockFactory, ProbeSettings};
use sanbench::prompts::{variation, VariationId};

fn main() {
    println!("a 40-ply game cut at 0.45 keeps {:?} plies\n", probe_cut(0.45, 40, 0.3, 0.7));

    let chat = MockFactory::new(MockChat::Synthetic(sanbench::chat::SyntheticProfile::reference_population()));
    let engines = || Ok::<Box<dyn Engine>, EngineError>(Box::new(FakeEngine::default()));
    let records = run_experiment(&variation(VariationId::Baseline), 8, 2, 3, GameSettings::default(), &engines, &chat, |_, _| Ok(()))
        .unwrap();

    // the probe answers come from a script: probe i reads line i
    let answers = (0..8)
        .map(|i| vec![format!("Black has a few options. I would look at Nf6, maybe e5 or d5 (probe {i}).")])
        .collect();
    let prober = MockFactory::new(MockChat::Script(ScriptedAdapter::new(answers)));
    let settings = ProbeSettings { sample: 8, ..ProbeSettings::default() };
    let probes = run_probe(&records, settings, &mut FakeEngine::default(), &prober).unwrap();
    for p in &probes {
        println!(
            "game {} cut {}/{}: suggested {:?}, played {}, engine {:?}, aligned {}, valid {}",
            p.game_id, p.cut, p.original_plies, p.suggestions, p.next_move, p.engine_top, p.alignment, p.suggestions_valid
        );
    }
}
