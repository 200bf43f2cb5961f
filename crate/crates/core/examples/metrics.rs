//! Per-game and aggregate metrics over a batch of simulated games.
//!
//! ```text
//! cargo run -p sanbench --example metrics
//! ```

use sanbench::chat::SyntheticProfile;
use sanbench::engine::fake::FakeEngine;
use sanbench::engine::{Engine, EngineError};
use sanbench::metrics::{aggregate, game_metrics, illegal_profile, AggregateOptions, BeCheckpoint};
use sanbench::orchestrator::{run_experiment, GameSettings, MockChat, MockFactory};
use sanbench::prompts::{variation, VariationId};

fn main() {
    let chat = MockFactory::new(MockChat::Synthetic(SyntheticProfile::reference_population()));
    let engines = || Ok::<Box<dyn Engine>, EngineError>(Box::new(FakeEngine::default()));
    let config = variation(VariationId::Baseline);
    let records = run_experiment(&config, 12, 4, 2024, GameSettings::default(), &engines, &chat, |_, _| Ok(())).unwrap();

    println!("game  termination       IMR    RBLM   GL   BE20   MRS");
    for r in &records {
        let Some(m) = game_metrics(r, 20, BeCheckpoint::ModelMove) else { continue };
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
        println!(
            "{:>4}  {:<16} {:.2}  {:>6}  {:>3}  {:>5}  {:>4}",
            r.game_id,
            r.termination.as_str(),
            m.imr,
            opt(m.rblm),
            m.gl,
            m.be_checkpoint.map_or("-".into(), |v| v.to_string()),
            opt(m.mrs)
        );
        for o in illegal_profile(r).iter().filter(|o| o.attempts > 1) {
            println!("        move {} repeated illegal texts {:?}", o.index, o.counts);
        }
    }
    let summary = aggregate(&records, AggregateOptions::default()).unwrap();
    for (name, stat) in [("IMR", summary.imr), ("RBLM", summary.rblm), ("GL", summary.gl), ("MRS", summary.mrs)] {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!("{name:<5} mean {} sd {} over {} games", show(stat.mean), show(stat.std), stat.n);
    }
    println!("curve points: {}", summary.curves.len());
}
