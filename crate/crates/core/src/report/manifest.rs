//! Run manifests: one TOML file describing a study run.
//!
//! ```toml
//! study = "study1"            # study1 | study2 | study3
//! seed = 7
//! games = 5                   # default: 100 for studies 1-2, 50 for study 3
//! rounds = 20                 # default 20
//! endowment = 10              # default 10
//! multiplier = 1.6            # default 1.6
//! parallelism = 4             # default 1
//! out = "runs/demo"
//! conditions = ["name"]       # default: both
//! pairings = ["CS", "SC"]     # persona orderings to keep; default: all
//!
//! [gateway]
//! mode = "mock"               # live | replay | mock (default mock)
//! fixture = "fixtures/run.jsonl"   # replay source, or record target in live/mock
//! variant = "corrected"       # corrected | as_printed
//! strictness = "lenient"      # lenient | strict
//!
//! [gateway.policy]            # TransportPolicy fields, all optional
//! max_in_flight = 8
//!
//! [[gateway.providers]]       # optional; replaces the built-in provider table
//! name = "openai"
//! dialect = "chat_completions"
//! base_url = "${OPENAI_BASE_URL}"
//! api_key_env = "OPENAI_API_KEY"
//!
//! [[agents]]
//! kind = "scripted"
//! display_name = "Cooperator"
//! strategy = { type = "always_contribute", amount = 10 }
//!
//! [[agents]]
//! kind = "llm"
//! provider = "openai"
//! model = "gpt-4o"
//! display_name = "GPT-4o"
//! ```
//!
//! `${VAR}` anywhere in the file is replaced by the environment variable before parsing;
//! an unset variable is an error. API keys themselves are only ever read from the
//! environment by the transport.

use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentSpec, Strictness, TemplateVariant};
use crate::game::{Condition, StudyStyle, DEFAULT_ENDOWMENT, DEFAULT_ROUNDS};
use crate::gateway::{ProviderConfig, TransportPolicy};
use crate::points::Multiplier;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("environment variable {0} referenced in the manifest is not set")]
    MissingEnv(String),
    #[error("invalid manifest: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid manifest: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    Live,
    Replay,
    #[default]
    Mock,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewaySettings {
    pub mode: GatewayMode,
    pub fixture: Option<PathBuf>,
    pub variant: TemplateVariant,
    pub strictness: Strictness,
    pub policy: TransportPolicy,
    pub providers: Vec<ProviderConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub study: StudyStyle,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub conditions: Vec<Condition>,
    #[serde(default)]
    pub pairings: Vec<String>,
    pub games: Option<u32>,
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    #[serde(default = "default_endowment")]
    pub endowment: u32,
    #[serde(default)]
    pub multiplier: Multiplier,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    pub out: PathBuf,
    #[serde(default)]
    pub gateway: GatewaySettings,
}

fn default_rounds() -> u32 {
    DEFAULT_ROUNDS
}

fn default_endowment() -> u32 {
    DEFAULT_ENDOWMENT
}

fn default_parallelism() -> usize {
    1
}

/// Replaces every `${VAR}` with the variable's value.
pub fn interpolate_env(text: &str) -> Result<String, ManifestError> {
    interpolate_with(text, |name| std::env::var(name).ok())
}

pub fn interpolate_with(
    text: &str,
    lookup: impl Fn(&str) -> Option<String>,
) -> Result<String, ManifestError> {
    let re = Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap();
    let mut missing = None;
    let out = re.replace_all(text, |caps: &regex::Captures| {
        lookup(&caps[1]).unwrap_or_else(|| {
            missing.get_or_insert_with(|| caps[1].to_string());
            String::new()
        })
    });
    match missing {
        Some(name) => Err(ManifestError::MissingEnv(name)),
        None => Ok(out.into_owned()),
    }
}

impl RunManifest {
    /// Manifest with defaults for everything but the study, agents and output directory.
    pub fn new(study: StudyStyle, agents: Vec<AgentSpec>, out: impl Into<PathBuf>) -> Self {
        RunManifest {
            study,
            agents,
            conditions: Vec::new(),
            pairings: Vec::new(),
            games: None,
            rounds: DEFAULT_ROUNDS,
            endowment: DEFAULT_ENDOWMENT,
            multiplier: Multiplier::default(),
            seed: 0,
            parallelism: 1,
            out: out.into(),
            gateway: GatewaySettings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let manifest: RunManifest = toml::from_str(&interpolate_env(text)?)?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let invalid = |m: String| Err(ManifestError::Invalid(m));
        if self.agents.is_empty() {
            return invalid("no agents given".into());
        }
        if self.parallelism == 0 {
            return invalid("parallelism must be at least 1".into());
        }
        if self.games == Some(0) {
            return invalid("games must be at least 1".into());
        }
        if self.gateway.mode == GatewayMode::Replay && self.gateway.fixture.is_none() {
            return invalid("replay mode needs a fixture path".into());
        }
        for p in &self.pairings {
            let n = self.study.num_players();
            if p.chars().count() != n || p.chars().any(|c| crate::game::Persona::from_letter(c).is_none()) {
                return invalid(format!("pairing {p:?} should be {n} letters from C, N, S"));
            }
        }
        self.gateway
            .policy
            .validate()
            .map_err(|e| ManifestError::Invalid(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentKind, Strategy};

    const DEMO: &str = r#"
study = "study1"
seed = 7
games = 5
out = "runs/demo"
conditions = ["name"]

[gateway]
mode = "mock"

[gateway.policy]
max_in_flight = 2

[[agents]]
kind = "scripted"
display_name = "Cooperator"
strategy = { type = "always_contribute", amount = 10 }

[[agents]]
kind = "llm"
provider = "openai"
model = "gpt-4o"
display_name = "GPT-4o"
"#;

    #[test]
    fn parses_demo_manifest_with_defaults() {
        let m = RunManifest::parse(DEMO).unwrap();
        m.validate().unwrap();
        assert_eq!(m.study, StudyStyle::Study1);
        assert_eq!((m.rounds, m.endowment, m.multiplier), (20, 10, Multiplier::default()));
        assert_eq!(m.gateway.policy.max_in_flight, 2);
        assert_eq!(m.gateway.policy.retry_budget, TransportPolicy::default().retry_budget);
        assert_eq!(
            m.agents[0].kind,
            AgentKind::Scripted {
                strategy: Strategy::AlwaysContribute { amount: 10 },
                display_name: "Cooperator".into()
            }
        );
        assert!(matches!(m.agents[1].kind, AgentKind::Llm { temperature, .. } if temperature == 1.0));
    }

    #[test]
    fn env_interpolation() {
        let lookup = |k: &str| (k == "HOST").then(|| "example.org".to_string());
        assert_eq!(
            interpolate_with("url = \"https://${HOST}/v1\"", lookup).unwrap(),
            "url = \"https://example.org/v1\""
        );
        assert!(matches!(
            interpolate_with("${NOPE}", lookup),
            Err(ManifestError::MissingEnv(v)) if v == "NOPE"
        ));
    }

    #[test]
    fn replay_without_fixture_is_rejected() {
        let m = RunManifest::parse(&DEMO.replace("mode = \"mock\"", "mode = \"replay\"")).unwrap();
        assert!(matches!(m.validate(), Err(ManifestError::Invalid(_))));
        let m = RunManifest::parse(&DEMO.replace("study = \"study1\"", "study = \"study1\"\nbogus = 1"));
        assert!(m.is_err());
    }
}
