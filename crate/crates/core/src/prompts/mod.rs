//! The nine prompt variations, template rendering and the board describer.
//!
//! Each variation ships as a TOML document under `assets/variations`;
//! [`catalog`] loads them and [`VariationConfig::from_toml`] accepts
//! user-supplied ones. Placeholders are `{name}`.

mod describe;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use crate::chat::HistoryPolicy;
use crate::chat::{ChatMessage, Role};
use crate::engine::OPENINGS;
use crate::extract::shots_fixture_text;
pub use describe::describe_board;

pub const RULES_SUMMARY: &str = include_str!("../../assets/rules_summary.txt");

const TYPO: &str = "the board state is a follows";
const TYPO_FIXED: &str = "the board state is as follows";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariationId {
    Baseline,
    #[serde(rename = "Int-Illegal")]
    IntIllegal,
    #[serde(rename = "Int-Rules")]
    IntRules,
    #[serde(rename = "Move-Repeat")]
    MoveRepeat,
    #[serde(rename = "Move-IlgRem")]
    MoveIlgRem,
    #[serde(rename = "Rsn-Simple")]
    RsnSimple,
    #[serde(rename = "Rsn-CoT")]
    RsnCot,
    #[serde(rename = "Rsn-DropCoT")]
    RsnDropCot,
    #[serde(rename = "Dsc-Base")]
    DscBase,
}

impl VariationId {
    pub const ALL: [VariationId; 9] = [
        VariationId::Baseline,
        VariationId::IntIllegal,
        VariationId::IntRules,
        VariationId::MoveRepeat,
        VariationId::MoveIlgRem,
        VariationId::RsnSimple,
        VariationId::RsnCot,
        VariationId::RsnDropCot,
        VariationId::DscBase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariationId::Baseline => "Baseline",
            VariationId::IntIllegal => "Int-Illegal",
            VariationId::IntRules => "Int-Rules",
            VariationId::MoveRepeat => "Move-Repeat",
            VariationId::MoveIlgRem => "Move-IlgRem",
            VariationId::RsnSimple => "Rsn-Simple",
            VariationId::RsnCot => "Rsn-CoT",
            VariationId::RsnDropCot => "Rsn-DropCoT",
            VariationId::DscBase => "Dsc-Base",
        }
    }

    fn asset(self) -> &'static str {
        match self {
            VariationId::Baseline => include_str!("../../assets/variations/baseline.toml"),
            VariationId::IntIllegal => include_str!("../../assets/variations/int-illegal.toml"),
            VariationId::IntRules => include_str!("../../assets/variations/int-rules.toml"),
            VariationId::MoveRepeat => include_str!("../../assets/variations/move-repeat.toml"),
            VariationId::MoveIlgRem => include_str!("../../assets/variations/move-ilgrem.toml"),
            VariationId::RsnSimple => include_str!("../../assets/variations/rsn-simple.toml"),
            VariationId::RsnCot => include_str!("../../assets/variations/rsn-cot.toml"),
            VariationId::RsnDropCot => include_str!("../../assets/variations/rsn-dropcot.toml"),
            VariationId::DscBase => include_str!("../../assets/variations/dsc-base.toml"),
        }
    }

    pub fn is_reasoning(self) -> bool {
        matches!(self, VariationId::RsnSimple | VariationId::RsnCot | VariationId::RsnDropCot)
    }
}

impl fmt::Display for VariationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariationId {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariationId::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| PromptError::UnknownVariation(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasoningMode {
    None,
    Simple,
    Cot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionMode {
    Direct,
    LlmAssisted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegenerationMode {
    /// Sample the assistant turn again with no new user text.
    Resample,
    /// Leave the rejected answer in place and send a reminder message.
    ReminderAppend,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown variation {0:?}")]
    UnknownVariation(String),
    #[error("opening {0:?} is not one of e4, d4, Nf3, e3")]
    UnknownOpening(String),
    #[error("template placeholder {{{0}}} is not defined here")]
    UnknownPlaceholder(String),
    #[error("unterminated placeholder in template")]
    Unterminated,
    #[error("invalid variation config: {0}")]
    Invalid(String),
    #[error("cannot parse variation config: {0}")]
    Parse(String),
}

fn default_role() -> Role {
    Role::User
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub id: VariationId,
    /// Placeholders: `{opening}`, `{rules}`.
    pub initial_template: String,
    /// Placeholders: `{san}`, `{history}`, `{description}`.
    pub move_template: String,
    /// Placeholders: `{san}`, `{illegal}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reminder_template: Option<String>,
    pub history: HistoryPolicy,
    pub reasoning: ReasoningMode,
    pub extraction: ExtractionMode,
    pub regeneration: RegenerationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cot_prefix: Option<String>,
    /// Role used for the initial prompt.
    #[serde(default = "default_role")]
    pub initial_role: Role,
    /// Writes "as follows" instead of the historical "a follows".
    #[serde(default)]
    pub fix_typo: bool,
}

impl VariationConfig {
    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        let cfg: VariationConfig = toml::from_str(text).map_err(|e| PromptError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        let invalid = |m: &str| Err(PromptError::Invalid(format!("{}: {m}", self.id)));
        if self.history.validate().is_err() {
            return invalid("history count must be at least 1");
        }
        if self.id == VariationId::MoveIlgRem
            && (self.regeneration != RegenerationMode::ReminderAppend || self.reminder_template.is_none())
        {
            return invalid("Move-IlgRem needs reminder-append regeneration and a reminder template");
        }
        if self.regeneration == RegenerationMode::ReminderAppend && self.reminder_template.is_none() {
            return invalid("reminder-append needs a reminder template");
        }
        if self.id.is_reasoning() && self.extraction != ExtractionMode::LlmAssisted {
            return invalid("reasoning variations use llm-assisted extraction");
        }
        if self.id == VariationId::DscBase && self.history != HistoryPolicy::KeepDescription(1) {
            return invalid("Dsc-Base keeps exactly one description");
        }
        if self.initial_role == Role::Assistant {
            return invalid("the initial prompt cannot come from the assistant");
        }
        if !self.initial_template.contains("{opening}") {
            return invalid("initial template lacks {opening}");
        }
        check_placeholders(&self.initial_template, &["opening", "rules"])?;
        check_placeholders(&self.move_template, &["san", "history", "description"])?;
        if let Some(t) = &self.reminder_template {
            check_placeholders(t, &["san", "illegal"])?;
        }
        Ok(())
    }

    pub fn describes_board(&self) -> bool {
        self.move_template.contains("{description}")
    }

    /// SHA-256 over the config and every fixture it can reach.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_toml().as_bytes());
        h.update([0]);
        h.update(RULES_SUMMARY.as_bytes());
        h.update([0]);
        h.update(shots_fixture_text().as_bytes());
        hex::encode(h.finalize())
    }
}

/// The shipped config for `id`.
pub fn variation(id: VariationId) -> VariationConfig {
    VariationConfig::from_toml(id.asset()).expect("bundled variation configs are valid")
}

/// Looks a variation up by name, e.g. `"Rsn-CoT"`.
pub fn variation_by_name(name: &str) -> Result<VariationConfig, PromptError> {
    Ok(variation(name.parse()?))
}

pub fn catalog() -> Vec<VariationConfig> {
    VariationId::ALL.into_iter().map(variation).collect()
}

pub fn rules_summary() -> &'static str {
    RULES_SUMMARY
}

/// Hash of a fixture text, for manifests.
pub fn fixture_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn placeholders(template: &str) -> Result<Vec<&str>, PromptError> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or(PromptError::Unterminated)?;
        out.push(&after[..close]);
        rest = &after[close + 1..];
    }
    Ok(out)
}

fn check_placeholders(template: &str, allowed: &[&str]) -> Result<(), PromptError> {
    for name in placeholders(template)? {
        if !allowed.contains(&name) {
            return Err(PromptError::UnknownPlaceholder(name.to_string()));
        }
    }
    Ok(())
}

/// Substitutes `{name}` placeholders.
pub fn render(template: &str, values: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or(PromptError::Unterminated)?;
        let name = &after[..close];
        let value = values
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| PromptError::UnknownPlaceholder(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn initial_prompt(config: &VariationConfig, opening: &str) -> Result<String, PromptError> {
    if !OPENINGS.contains(&opening) {
        return Err(PromptError::UnknownOpening(opening.to_string()));
    }
    render(&config.initial_template, &[("opening", opening), ("rules", RULES_SUMMARY.trim_end())])
}

/// The initial prompt as a message with the configured role.
pub fn initial_message(config: &VariationConfig, opening: &str) -> Result<ChatMessage, PromptError> {
    let text = initial_prompt(config, opening)?;
    Ok(ChatMessage::new(config.initial_role, text).tagged(crate::chat::Annotation::InitialPrompt))
}

/// What [`move_prompt`] needs to know about the game.
#[derive(Debug, Clone, Copy)]
pub struct MoveContext<'a> {
    /// The engine's move, in SAN.
    pub san: &'a str,
    /// Every ply so far, white first, ending with `san`.
    pub plies: &'a [String],
    /// Position after `san`.
    pub board: &'a sanbench_rules::Board,
}

pub fn move_prompt(config: &VariationConfig, ctx: MoveContext<'_>) -> Result<String, PromptError> {
    let history = if config.move_template.contains("{history}") {
        sanbench_rules::numbered_movetext(ctx.plies, true, 1)
    } else {
        String::new()
    };
    let description = if config.describes_board() { describe_board(ctx.board) } else { String::new() };
    let text = render(
        &config.move_template,
        &[("san", ctx.san), ("history", &history), ("description", description.trim_end())],
    )?;
    Ok(if config.fix_typo { text.replace(TYPO, TYPO_FIXED) } else { text })
}

/// The reminder sent after illegal attempts, listing all of them so far.
pub fn reminder_prompt(config: &VariationConfig, san: &str, illegal: &[String]) -> Result<Option<String>, PromptError> {
    match &config.reminder_template {
        None => Ok(None),
        Some(t) => render(t, &[("san", san), ("illegal", &illegal.join(", "))]).map(Some),
    }
}

/// Decides whether to inject the chain-of-thought opener for the next
/// reply. It is skipped when the model's previous reply already began with
/// it on its own.
pub fn cot_prefix<'a>(config: &'a VariationConfig, transcript: &[ChatMessage]) -> CotDecision<'a> {
    let Some(prefix) = config.cot_prefix.as_deref() else {
        return CotDecision::NotApplicable;
    };
    let previous = transcript.iter().rev().find(|m| m.role == Role::Assistant);
    match previous {
        Some(m) if m.injected_prefix.is_none() && m.content.trim_start().starts_with(prefix) => CotDecision::Emulated,
        _ => CotDecision::Inject(prefix),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CotDecision<'a> {
    NotApplicable,
    Inject(&'a str),
    /// The model produced the opener itself last time.
    Emulated,
}

impl<'a> CotDecision<'a> {
    pub fn prefix(self) -> Option<&'a str> {
        match self {
            CotDecision::Inject(p) => Some(p),
            _ => None,
        }
    }
}
