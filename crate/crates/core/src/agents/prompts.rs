//! System-prompt template store.
//!
//! Templates live as plain text under `templates/<study>/<persona>_<condition>.txt` and are
//! compiled into the binary. Placeholders:
//!
//! | placeholder    | replaced with                           |
//! |----------------|-----------------------------------------|
//! | `<MODEL-NAME>` | the agent's own display name            |
//! | `<ROUNDS>`     | rounds per game                         |
//! | `<ENDOWMENT>`  | points received each round              |
//! | `<MULTIPLIER>` | pool multiplier, one decimal (`1.6`)    |
//!
//! Two Study 1 Name templates come in two variants. [`TemplateVariant::AsPrinted`] keeps a
//! stray NoName opponent sentence and, for the selfish persona, lacks the persona sentence;
//! [`TemplateVariant::Corrected`], the default, has neither slip. All other templates are
//! shared by both variants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Condition, GameConfig, Persona, StudyStyle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("the Name condition needs a non-empty display name")]
    MissingDisplayName,
    #[error("{study} prompts are written for {expected} players, config has {got}")]
    PlayerCount {
        study: StudyStyle,
        expected: usize,
        got: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateVariant {
    #[default]
    Corrected,
    AsPrinted,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PromptStore {
    pub variant: TemplateVariant,
}

macro_rules! template {
    ($path:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/templates/", $path))
    };
}

impl PromptStore {
    pub fn new(variant: TemplateVariant) -> Self {
        PromptStore { variant }
    }

    /// Raw template text, placeholders intact.
    pub fn template(&self, study: StudyStyle, persona: Persona, condition: Condition) -> &'static str {
        use Condition::*;
        use Persona::*;
        use StudyStyle::*;
        let printed = self.variant == TemplateVariant::AsPrinted;
        match (study, persona, condition) {
            (Study1, Neutral, NoName) => template!("study1/neutral_noname.txt"),
            (Study1, Collective, NoName) => template!("study1/collective_noname.txt"),
            (Study1, Selfish, NoName) => template!("study1/selfish_noname.txt"),
            (Study1, Neutral, Name) => template!("study1/neutral_name.txt"),
            (Study1, Collective, Name) if printed => {
                template!("study1/collective_name.as_printed.txt")
            }
            (Study1, Collective, Name) => template!("study1/collective_name.txt"),
            (Study1, Selfish, Name) if printed => template!("study1/selfish_name.as_printed.txt"),
            (Study1, Selfish, Name) => template!("study1/selfish_name.txt"),
            (Study2, Neutral, NoName) => template!("study2/neutral_noname.txt"),
            (Study2, Collective, NoName) => template!("study2/collective_noname.txt"),
            (Study2, Selfish, NoName) => template!("study2/selfish_noname.txt"),
            (Study2, Neutral, Name) => template!("study2/neutral_name.txt"),
            (Study2, Collective, Name) => template!("study2/collective_name.txt"),
            (Study2, Selfish, Name) => template!("study2/selfish_name.txt"),
            (Study3, Neutral, NoName) => template!("study3/neutral_noname.txt"),
            (Study3, Collective, NoName) => template!("study3/collective_noname.txt"),
            (Study3, Selfish, NoName) => template!("study3/selfish_noname.txt"),
            (Study3, Neutral, Name) => template!("study3/neutral_name.txt"),
            (Study3, Collective, Name) => template!("study3/collective_name.txt"),
            (Study3, Selfish, Name) => template!("study3/selfish_name.txt"),
        }
    }

    /// System prompt for one player. Under the Name condition the stated opponent is the
    /// player's own model.
    pub fn build_system_prompt(
        &self,
        config: &GameConfig,
        persona: Persona,
        display_name: &str,
    ) -> Result<String, PromptError> {
        let study = config.study_style;
        if config.num_players != study.num_players() {
            return Err(PromptError::PlayerCount {
                study,
                expected: study.num_players(),
                got: config.num_players,
            });
        }
        let name = display_name.trim();
        if config.condition == Condition::Name && name.is_empty() {
            return Err(PromptError::MissingDisplayName);
        }
        let text = self
            .template(study, persona, config.condition)
            .replace("<MODEL-NAME>", name)
            .replace("<ROUNDS>", &config.num_rounds.to_string())
            .replace("<ENDOWMENT>", &config.endowment.to_string())
            .replace("<MULTIPLIER>", &config.multiplier.to_string());
        Ok(text)
    }
}

/// [`PromptStore::build_system_prompt`] with the default (corrected) templates.
pub fn build_system_prompt(
    config: &GameConfig,
    persona: Persona,
    display_name: &str,
) -> Result<String, PromptError> {
    PromptStore::default().build_system_prompt(config, persona, display_name)
}

/// How the opponent is referred to in reminders, matching each study's prompt wording.
pub fn opponent_label(study: StudyStyle, condition: Condition, display_name: &str) -> String {
    match (condition, study) {
        (Condition::NoName, StudyStyle::Study1) => "one other AI agent".to_string(),
        (Condition::NoName, StudyStyle::Study2) => "another AI".to_string(),
        (Condition::NoName, StudyStyle::Study3) => "three other AIs".to_string(),
        (Condition::Name, StudyStyle::Study3) => format!("three other {}s", display_name.trim()),
        (Condition::Name, _) => display_name.trim().to_string(),
    }
}

/// Phrase every NoName prompt of a study contains.
pub fn noname_phrase(study: StudyStyle) -> &'static str {
    match study {
        StudyStyle::Study1 => "one other AI agent",
        StudyStyle::Study2 => "against another AI",
        StudyStyle::Study3 => "against three other AIs",
    }
}
