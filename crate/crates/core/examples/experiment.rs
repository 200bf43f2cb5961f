//! A full mock run from a manifest: play, probe, validate and write the
//! report bundle.
//!
//! ```text
//! cargo run -p sanbench --example experiment
//! cargo run -p sanbench --example experiment -- /tmp/run dsc-base 40
//! ```

use std::path::PathBuf;

use sanbench::pipeline::{probe_dir, report_dir, run_manifest, validate_dir};
use sanbench::prompts::VariationId;
use sanbench::report::{summary_markdown, ExperimentManifest};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("sanbench-example"), PathBuf::from);
    let id: VariationId = args.next().map_or(VariationId::Baseline, |s| s.parse().unwrap_or_else(|e| panic!("{e}")));
    let games = args.next().map_or(20, |g| g.parse().expect("games must be a number"));

    let mut manifest = ExperimentManifest::new(id, games, 11);
    manifest.parallelism = 4;
    println!("manifest:\n{}", manifest.to_toml());

    let here = PathBuf::from(".");
    let run = run_manifest(&manifest, &here, &out).unwrap();
    println!("{} games in {}", run.records.len(), run.games_path.display());
    let probes = probe_dir(&manifest, &here, &out).unwrap();
    println!("{} probe records", probes.len());
    let (n, issues) = validate_dir(&out).unwrap();
    println!("{n} games audited, {} issues", issues.len());
    let (bundle, files) = report_dir(&out, manifest.report).unwrap();
    println!("\n{}", summary_markdown(&bundle));
    for f in files {
        println!("wrote {}", f.display());
    }
}
