//! Players: a uniform decision interface over scripted strategies and LLM-backed agents.

pub mod llm;
pub mod parse;
pub mod prompts;
pub mod render;
pub mod scripted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Persona;
use crate::gateway::GatewayError;
use crate::points::Points;

pub use llm::LlmAgent;
pub use parse::{parse_decision, render_decision, ParseError, Strictness};
pub use prompts::{build_system_prompt, opponent_label, PromptError, PromptStore, TemplateVariant};
pub use scripted::{ScriptedAgent, Strategy};

/// What a player does this round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionDecision {
    pub contribution: u32,
    pub reasoning: Option<String>,
}

/// What a player knows when asked for round `round_index`.
#[derive(Clone, Debug)]
pub struct Observation {
    pub round_index: u32,
    pub num_rounds: u32,
    pub num_players: usize,
    pub player_index: usize,
    pub endowment: u32,
    /// One entry per completed round, so `history.len() == round_index - 1`.
    pub history: Vec<HistoryEntry>,
    pub rules_reminder: Option<String>,
    pub opponent_label: String,
    /// Exact user-turn text for this round: previous summary (if any) plus the request.
    pub message: String,
    pub expects_reasoning: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub round_index: u32,
    pub total: u32,
    pub own_contribution: u32,
    pub own_gain: Points,
    pub own_cumulative: Points,
}

/// Identity of a seated player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentProfile {
    pub id: String,
    pub display_name: String,
    pub opponent_label: String,
    pub system_prompt: Option<String>,
}

/// A decision plus every prompt/response pair it took to get there.
#[derive(Clone, Debug)]
pub struct Turn {
    pub decision: ContributionDecision,
    pub exchanges: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("gateway error: {source}")]
    Gateway {
        #[source]
        source: GatewayError,
        exchanges: Vec<(String, String)>,
    },
    #[error("no usable decision after {attempts} attempts: {last}")]
    RetriesExhausted {
        attempts: u32,
        last: ParseError,
        exchanges: Vec<(String, String)>,
    },
    #[error("scripted strategy produced {contribution}, outside 0..={endowment}")]
    InvalidScriptedDecision { contribution: u32, endowment: u32 },
}

impl AgentError {
    /// Exchanges completed before the failure, so aborted transcripts keep them.
    pub fn exchanges(&self) -> &[(String, String)] {
        match self {
            AgentError::Gateway { exchanges, .. }
            | AgentError::RetriesExhausted { exchanges, .. } => exchanges,
            AgentError::InvalidScriptedDecision { .. } => &[],
        }
    }
}

pub trait Agent: Send {
    fn profile(&self) -> &AgentProfile;

    fn decide(&mut self, observation: &Observation) -> Result<Turn, AgentError>;
}

/// Who plays: a scripted strategy or a model behind a provider.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AgentKind {
    Scripted {
        strategy: Strategy,
        display_name: String,
    },
    Llm {
        provider: String,
        model: String,
        display_name: String,
        #[serde(default = "default_temperature")]
        temperature: f64,
    },
}

pub const GAMEPLAY_TEMPERATURE: f64 = 1.0;

fn neutral() -> Persona {
    Persona::Neutral
}

fn default_temperature() -> f64 {
    GAMEPLAY_TEMPERATURE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    #[serde(flatten)]
    pub kind: AgentKind,
    #[serde(default = "neutral")]
    pub persona: Persona,
}

impl AgentSpec {
    pub fn scripted(strategy: Strategy, display_name: impl Into<String>) -> Self {
        AgentSpec {
            kind: AgentKind::Scripted {
                strategy,
                display_name: display_name.into(),
            },
            persona: Persona::Neutral,
        }
    }

    pub fn llm(
        provider: impl Into<String>,
        model: impl Into<String>,
        display_name: impl Into<String>,
    ) -> Self {
        AgentSpec {
            kind: AgentKind::Llm {
                provider: provider.into(),
                model: model.into(),
                display_name: display_name.into(),
                temperature: GAMEPLAY_TEMPERATURE,
            },
            persona: Persona::Neutral,
        }
    }

    pub fn with_persona(mut self, persona: Persona) -> Self {
        self.persona = persona;
        self
    }

    /// Name injected into prompts under the Name condition.
    pub fn display_name(&self) -> &str {
        match &self.kind {
            AgentKind::Scripted { display_name, .. } | AgentKind::Llm { display_name, .. } => {
                display_name
            }
        }
    }

    pub fn is_llm(&self) -> bool {
        matches!(self.kind, AgentKind::Llm { .. })
    }

    /// Same player apart from the persona.
    pub fn same_player(&self, other: &AgentSpec) -> bool {
        self.kind == other.kind
    }
}

/// `scripted:<strategy>[@Name]` or `llm:<provider>/<model>[@Name]`, persona neutral.
/// Without `@Name` the display name is the strategy id or the model id.
impl std::str::FromStr for AgentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, name) = match s.rsplit_once('@') {
            Some((body, name)) if !name.trim().is_empty() => (body.trim(), Some(name.trim())),
            _ => (s.trim(), None),
        };
        let (kind, rest) = body
            .split_once(':')
            .ok_or_else(|| format!("agent {s:?} should start with scripted: or llm:"))?;
        match kind {
            "scripted" => {
                let strategy: Strategy = rest.parse()?;
                let name = name.map_or_else(|| strategy.id(), str::to_string);
                Ok(AgentSpec::scripted(strategy, name))
            }
            "llm" => {
                let (provider, model) = rest
                    .split_once('/')
                    .filter(|(p, m)| !p.is_empty() && !m.is_empty())
                    .ok_or_else(|| format!("agent {s:?} should look like llm:<provider>/<model>"))?;
                Ok(AgentSpec::llm(provider, model, name.unwrap_or(model)))
            }
            other => Err(format!("unknown agent kind {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agent_spec_short_forms() {
        let a: AgentSpec = "llm:openai/gpt-4o@GPT-4o".parse().unwrap();
        assert_eq!(a, AgentSpec::llm("openai", "gpt-4o", "GPT-4o"));
        let a: AgentSpec = "llm:openrouter/qwen/qwen3-235b".parse().unwrap();
        assert_eq!(a.display_name(), "qwen/qwen3-235b");
        let a: AgentSpec = "scripted:always:10".parse().unwrap();
        assert_eq!(a.display_name(), "always_contribute(10)");
        assert!("bogus".parse::<AgentSpec>().is_err());
        assert!("llm:gpt".parse::<AgentSpec>().is_err());
    }

    #[test]
    fn agent_spec_serde_shape() {
        let spec = AgentSpec::llm("anthropic", "claude-sonnet-4", "Claude Sonnet 4")
            .with_persona(Persona::Selfish);
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["kind"], "llm");
        assert_eq!(json["temperature"], 1.0);
        assert_eq!(json["persona"], "selfish");
        assert_eq!(serde_json::from_value::<AgentSpec>(json).unwrap(), spec);
    }
}
