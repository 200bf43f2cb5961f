//! Persistence and presentation: JSON Lines logs, PGN, summary tables,
//! per-move curves and the experiment manifest.

pub mod manifest;
mod pgn;
pub mod store;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::metrics::{aggregate, pearson, AggregateOptions, MetricsError, MetricsSummary, Stat};
use crate::orchestrator::{GameRecord, ProbeRecord};
use crate::prompts::VariationId;

pub use manifest::{AdapterSpec, EngineSpec, ExperimentManifest, ManifestError, MockSpec};
pub use pgn::{annotated_transcript, export_pgn, replay, result_token, ReplayError};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no game records")]
    Empty,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Published per-variation values for the original backend, for side by
/// side comparison with harness output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub variation: VariationId,
    pub imr: f64,
    pub rblm: f64,
    pub gl: f64,
    pub be: f64,
    pub mrs: f64,
    pub be_full: f64,
}

const fn reference(variation: VariationId, imr: f64, rblm: f64, gl: f64, be: f64, mrs: f64, be_full: f64) -> ReferenceRow {
    ReferenceRow { variation, imr, rblm, gl, be, mrs, be_full }
}

pub const REFERENCE_MODEL: &str = "gpt-3.5-turbo-0301";

pub const REFERENCE: [ReferenceRow; 9] = [
    reference(VariationId::Baseline, 0.26, 6.78, 18.79, 253.1, 0.51, 88.38),
    reference(VariationId::IntIllegal, 0.27, 6.86, 18.07, 278.6, 0.5, 84.38),
    reference(VariationId::IntRules, 0.33, 7.52, 13.15, 364.53, 0.44, 90.84),
    reference(VariationId::MoveRepeat, 0.31, 5.82, 23.97, 284.99, 0.64, 148.24),
    reference(VariationId::MoveIlgRem, 0.23, 9.33, 12.96, 314.38, 0.06, 71.7),
    reference(VariationId::RsnSimple, 0.34, 5.84, 18.11, 412.26, 0.63, 145.64),
    reference(VariationId::RsnCot, 0.37, 5.82, 18.45, 492.4, 0.59, 166.79),
    reference(VariationId::RsnDropCot, 0.4, 5.31, 19.56, 525.34, 0.63, 194.12),
    reference(VariationId::DscBase, 0.47, 5.02, 19.3, 763.11, 0.6, 293.35),
];

/// Reported correlation between RBLM and MRS for the reference backend.
pub const REFERENCE_RBLM_MRS_R: f64 = -0.86;
/// Reference probe tallies: aligned and valid-suggestion games out of 50.
pub const REFERENCE_PROBE: (usize, usize, usize) = (9, 39, 50);

pub fn reference_row(variation: VariationId) -> Option<&'static ReferenceRow> {
    REFERENCE.iter().find(|r| r.variation == variation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variation: VariationId,
    pub games: usize,
    pub imr: Stat,
    pub rblm: Stat,
    pub gl: Stat,
    pub be_checkpoint: Stat,
    pub be_full: Stat,
    pub mrs: Stat,
    pub natural_rate: f64,
    pub checkpoint_coverage: f64,
    pub transport_failures: usize,
    pub move_capped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeTally {
    pub probes: usize,
    pub alignment: usize,
    pub suggestions_valid: usize,
}

impl ProbeTally {
    pub fn of(probes: &[ProbeRecord]) -> ProbeTally {
        ProbeTally {
            probes: probes.len(),
            alignment: probes.iter().filter(|p| p.alignment).count(),
            suggestions_valid: probes.iter().filter(|p| p.suggestions_valid).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub rows: Vec<SummaryRow>,
    pub summaries: BTreeMap<VariationId, MetricsSummary>,
    pub probes: Option<ProbeTally>,
    /// RBLM against MRS over games where both are defined.
    pub rblm_mrs_games: Option<f64>,
    /// RBLM against MRS over per-variation means.
    pub rblm_mrs_variations: Option<f64>,
}

/// Curve families, in output order.
pub const CURVES: [&str; 4] = ["imr", "rblm", "be", "survivors"];

pub fn build_report(records: &[GameRecord], probes: &[ProbeRecord], options: AggregateOptions) -> Result<ReportBundle, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut by_variation: BTreeMap<VariationId, Vec<GameRecord>> = BTreeMap::new();
    for r in records {
        by_variation.entry(r.variation).or_default().push(r.clone());
    }
    let mut summaries = BTreeMap::new();
    for (v, games) in &by_variation {
        summaries.insert(*v, aggregate(games, options)?);
    }
    let rows = summaries
        .iter()
        .map(|(v, s)| SummaryRow {
            variation: *v,
            games: s.games.len(),
            imr: s.imr,
            rblm: s.rblm,
            gl: s.gl,
            be_checkpoint: s.be_checkpoint,
            be_full: s.be_full,
            mrs: s.mrs,
            natural_rate: s.natural_rate,
            checkpoint_coverage: s.checkpoint_coverage,
            transport_failures: s.transport_failures,
            move_capped: s.move_capped,
        })
        .collect::<Vec<_>>();
    let (gx, gy): (Vec<f64>, Vec<f64>) = summaries
        .values()
        .flat_map(|s| s.games.iter())
        .filter_map(|g| Some((g.rblm?, g.mrs?)))
        .unzip();
    let (vx, vy): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| Some((r.rblm.mean?, r.mrs.mean?))).unzip();
    Ok(ReportBundle {
        rows,
        summaries,
        probes: (!probes.is_empty()).then(|| ProbeTally::of(probes)),
        rblm_mrs_games: pearson(&gx, &gy).ok(),
        rblm_mrs_variations: pearson(&vx, &vy).ok(),
    })
}

fn num(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(String::new, |v| format!("{v:.decimals$}"))
}

fn dash(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.decimals$}"))
}

pub fn summary_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from(
        "variation,games,imr,imr_std,rblm,rblm_std,gl,gl_std,be,be_std,be_full,be_full_std,mrs,mrs_std,\
natural_rate,checkpoint_coverage,transport_failures,move_capped\n",
    );
    for r in &bundle.rows {
        let stat = |s: &Stat, d: usize| format!("{},{}", num(s.mean, d), num(s.std, d));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.4},{:.4},{},{}\n",
            r.variation,
            r.games,
            stat(&r.imr, 4),
            stat(&r.rblm, 4),
            stat(&r.gl, 4),
            stat(&r.be_checkpoint, 2),
            stat(&r.be_full, 2),
            stat(&r.mrs, 4),
            r.natural_rate,
            r.checkpoint_coverage,
            r.transport_failures,
            r.move_capped,
        ));
    }
    out
}

/// Markdown tables: harness results next to the reference values, then
/// probe tallies and correlations.
pub fn summary_markdown(bundle: &ReportBundle) -> String {
    let checkpoint = bundle.summaries.values().next().map_or(20, |s| s.options.checkpoint_move);
    let mut out = String::new();
    out.push_str(&format!(
        "| Variation | Games | IMR | RBLM | GL | BE{checkpoint} | BE full | MRS | Natural | BE{checkpoint} coverage |\n"
    ));
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &bundle.rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {:.4} | {:.2} |\n",
            r.variation,
            r.games,
            dash(r.imr.mean, 2),
            dash(r.rblm.mean, 2),
            dash(r.gl.mean, 2),
            dash(r.be_checkpoint.mean, 2),
            dash(r.be_full.mean, 2),
            dash(r.mrs.mean, 2),
            r.natural_rate,
            r.checkpoint_coverage,
        ));
    }
    out.push_str(&format!("\nReference values ({REFERENCE_MODEL}):\n\n"));
    out.push_str("| Variation | IMR | RBLM | GL | BE20 | BE full | MRS |\n|---|---|---|---|---|---|---|\n");
    for r in &REFERENCE {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.variation, r.imr, r.rblm, r.gl, r.be, r.be_full, r.mrs
        ));
    }
    out.push_str(&format!(
        "\nRBLM vs MRS, Pearson r: per game {}, per variation {} (reference {REFERENCE_RBLM_MRS_R})\n",
        dash(bundle.rblm_mrs_games, 3),
        dash(bundle.rblm_mrs_variations, 3)
    ));
    if let Some(p) = bundle.probes {
        let (ra, rv, rn) = REFERENCE_PROBE;
        out.push_str(&format!(
            "\nProbe: {} of {} aligned, {} of {} with valid suggestions (reference {ra}/{rn} and {rv}/{rn})\n",
            p.alignment, p.probes, p.suggestions_valid, p.probes
        ));
    }
    out
}

/// Values of one curve family for every variation, row `t - 1` for move `t`.
pub fn curve_series(bundle: &ReportBundle, family: &str) -> Vec<(String, Vec<Option<f64>>)> {
    bundle
        .summaries
        .iter()
        .map(|(v, s)| {
            let values = s
                .curves
                .iter()
                .map(|c| match family {
                    "imr" => c.imr,
                    "rblm" => c.rblm,
                    "be" => c.be,
                    _ => Some(c.survivors as f64),
                })
                .collect();
            (v.to_string(), values)
        })
        .collect()
}

/// One CSV per curve family: `t` then a column per variation. Cells past a
/// variation's last move are left empty.
pub fn curve_csv(bundle: &ReportBundle, family: &str) -> String {
    let series = curve_series(bundle, family);
    let rows = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut out = String::from("t");
    for (name, _) in &series {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let decimals = if family == "survivors" { 0 } else { 4 };
    for t in 0..rows {
        out.push_str(&(t + 1).to_string());
        for (_, v) in &series {
            out.push(',');
            out.push_str(&num(v.get(t).copied().flatten(), decimals));
        }
        out.push('\n');
    }
    out
}

pub fn render_curves(bundle: &ReportBundle) -> Vec<(String, String)> {
    let titles = [
        ("imr", "Average IMR by move", "IMR"),
        ("rblm", "Average RBLM by move", "RBLM"),
        ("be", "Board evaluation by move", "centipawns"),
        ("survivors", "Remaining games by move", "games"),
    ];
    titles
        .iter()
        .map(|(family, title, label)| (format!("{family}.svg"), svg::line_chart(title, label, &curve_series(bundle, family))))
        .collect()
}

pub fn games_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("variation,game_id,termination,imr,rblm,gl,be,be_full,mrs\n");
    for (v, s) in &bundle.summaries {
        for g in &s.games {
            out.push_str(&format!(
                "{v},{},{},{:.4},{},{},{},{},{}\n",
                g.game_id,
                g.termination.as_str(),
                g.imr,
                num(g.rblm, 4),
                g.gl,
                num(g.be_checkpoint, 0),
                num(g.be_full, 2),
                num(g.mrs, 4)
            ));
        }
    }
    out
}

pub fn probes_csv(probes: &[ProbeRecord]) -> String {
    let mut out = String::from("game_id,fraction,cut,original_plies,next_move,suggestions,engine_top,alignment,suggestions_valid\n");
    for p in probes {
        out.push_str(&format!(
            "{},{:.4},{},{},{},{},{},{},{}\n",
            p.game_id,
            p.fraction,
            p.cut,
            p.original_plies,
            p.next_move,
            p.suggestions.join(" "),
            p.engine_top.join(" "),
            p.alignment,
            p.suggestions_valid
        ));
    }
    out
}

/// Writes every table, curve CSV and SVG into `dir` and returns the paths
/// in a fixed order.
pub fn write_bundle(bundle: &ReportBundle, probes: &[ProbeRecord], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String)> = vec![
        ("summary.csv".into(), summary_csv(bundle)),
        ("summary.md".into(), summary_markdown(bundle)),
        ("games.csv".into(), games_csv(bundle)),
        (
            "summary.json".into(),
            serde_json::to_string_pretty(&bundle.rows).expect("rows serialize") + "\n",
        ),
    ];
    for family in CURVES {
        files.push((format!("{family}.csv"), curve_csv(bundle, family)));
    }
    files.extend(render_curves(bundle));
    if !probes.is_empty() {
        files.push(("probes.csv".into(), probes_csv(probes)));
    }
    let mut paths = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}
