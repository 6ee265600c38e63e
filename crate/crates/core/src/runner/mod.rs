//! Condition matrices, seeded batch execution, and transcript files.

pub mod transcripts;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::prompts::noname_phrase;
use crate::agents::{
    opponent_label, Agent, AgentKind, AgentProfile, AgentSpec, LlmAgent, PromptError, PromptStore,
    ScriptedAgent, Strictness,
};
use crate::game::{
    pairing_label, play_game, Condition, GameConfig, GameError, GameTranscript, Persona,
    StudyStyle, DEFAULT_ENDOWMENT, DEFAULT_ROUNDS,
};
use crate::gateway::Gateway;
use crate::points::Multiplier;

pub use transcripts::{load_transcripts, persist_transcripts, TranscriptError, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("{study} needs {expected} agent specs, got {got}")]
    PlayerCount {
        study: StudyStyle,
        expected: String,
        got: usize,
    },
    #[error("Study 3 plays copies of one model with one prompt; got differing specs")]
    Heterogeneous,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("{0} is an LLM agent but no gateway is configured")]
    NoGateway(String),
    #[error("parallelism must be at least 1")]
    Parallelism,
    #[error("system prompt framing check failed: {0}")]
    Framing(String),
}

/// One experimental cell: a persona ordering under one condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCell {
    pub study: StudyStyle,
    pub condition: Condition,
    /// One per seat, personas set.
    pub agents: Vec<AgentSpec>,
    pub games: u32,
    pub rounds: u32,
    pub endowment: u32,
    pub multiplier: Multiplier,
}

impl ConditionCell {
    pub fn personas(&self) -> Vec<Persona> {
        self.agents.iter().map(|a| a.persona).collect()
    }

    /// Persona letters per seat, e.g. `CS`.
    pub fn pairing(&self) -> String {
        pairing_label(&self.personas())
    }

    /// Everything except the condition, e.g. `study1-CS`. Name and NoName cells with the
    /// same shape are compared in delta tables.
    pub fn shape_key(&self) -> String {
        format!("study{}-{}", self.study.number(), self.pairing())
    }

    /// `study1-CS-name`; also the transcript file stem.
    pub fn label(&self) -> String {
        format!("{}-{}", self.shape_key(), self.condition)
    }

    pub fn config(&self, seed: u64) -> GameConfig {
        GameConfig {
            num_players: self.agents.len(),
            num_rounds: self.rounds,
            endowment: self.endowment,
            multiplier: self.multiplier,
            condition: self.condition,
            personas: self.personas(),
            study_style: self.study,
            games: self.games,
            seed,
        }
    }

    pub fn with_games(mut self, games: u32) -> Self {
        self.games = games;
        self
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }
}

/// Every cell of a study for the given agents. Studies 1 and 2 take two specs and yield the
/// nine persona orderings under both conditions; Study 3 takes one spec (or four identical
/// ones) and yields three personas under both conditions. `games` defaults to the study's
/// batch size.
pub fn enumerate_conditions(
    study: StudyStyle,
    pairing: &[AgentSpec],
    games: Option<u32>,
) -> Result<Vec<ConditionCell>, RunnerError> {
    let n = study.num_players();
    let seats: Vec<AgentSpec> = match study {
        StudyStyle::Study1 | StudyStyle::Study2 => {
            if pairing.len() != n {
                return Err(RunnerError::PlayerCount {
                    study,
                    expected: n.to_string(),
                    got: pairing.len(),
                });
            }
            pairing.to_vec()
        }
        StudyStyle::Study3 => match pairing {
            [one] => vec![one.clone(); n],
            many if many.len() == n => {
                let first = &many[0];
                if many.iter().any(|s| !s.same_player(first) || s.persona != first.persona) {
                    return Err(RunnerError::Heterogeneous);
                }
                many.to_vec()
            }
            other => {
                return Err(RunnerError::PlayerCount {
                    study,
                    expected: format!("1 or {n}"),
                    got: other.len(),
                })
            }
        },
    };

    let orderings: Vec<Vec<Persona>> = match study {
        StudyStyle::Study3 => Persona::ALL.iter().map(|&p| vec![p; n]).collect(),
        _ => Persona::ALL
            .iter()
            .flat_map(|&a| Persona::ALL.iter().map(move |&b| vec![a, b]))
            .collect(),
    };

    let mut cells = Vec::with_capacity(orderings.len() * 2);
    for personas in &orderings {
        for condition in Condition::ALL {
            cells.push(ConditionCell {
                study,
                condition,
                agents: seats
                    .iter()
                    .zip(personas)
                    .map(|(spec, &p)| spec.clone().with_persona(p))
                    .collect(),
                games: games.unwrap_or_else(|| study.default_games()),
                rounds: DEFAULT_ROUNDS,
                endowment: DEFAULT_ENDOWMENT,
                multiplier: Multiplier::default(),
            });
        }
    }
    Ok(cells)
}

/// The `index + 1`-th SplitMix64 output for state `master_seed`.
pub fn derive_game_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub cell: ConditionCell,
    pub master_seed: u64,
    /// Every attempted game in index order, invalid ones included.
    pub transcripts: Vec<GameTranscript>,
    pub invalid_count: usize,
}

impl BatchResult {
    pub fn new(cell: ConditionCell, master_seed: u64, transcripts: Vec<GameTranscript>) -> Self {
        let invalid_count = transcripts.iter().filter(|t| !t.valid).count();
        BatchResult {
            cell,
            master_seed,
            transcripts,
            invalid_count,
        }
    }

    pub fn valid(&self) -> impl Iterator<Item = &GameTranscript> {
        self.transcripts.iter().filter(|t| t.valid)
    }

    pub fn valid_count(&self) -> usize {
        self.transcripts.len() - self.invalid_count
    }
}

/// Builds agents for cells and runs them.
#[derive(Clone)]
pub struct Harness {
    pub gateway: Option<Arc<Gateway>>,
    pub prompts: PromptStore,
    pub strictness: Strictness,
    pub max_reprompts: u32,
}

impl Default for Harness {
    fn default() -> Self {
        Harness {
            gateway: None,
            prompts: PromptStore::default(),
            strictness: Strictness::default(),
            max_reprompts: crate::agents::llm::DEFAULT_MAX_REPROMPTS,
        }
    }
}

impl Harness {
    /// Scripted agents only; any LLM spec is a configuration error.
    pub fn offline() -> Self {
        Harness::default()
    }

    pub fn with_gateway(gateway: Arc<Gateway>) -> Self {
        Harness {
            gateway: Some(gateway),
            ..Harness::default()
        }
    }

    /// Fresh agents for one game: own conversation, own system prompt, per-seat seed.
    pub fn build_agents(
        &self,
        cell: &ConditionCell,
        game_seed: u64,
    ) -> Result<Vec<Box<dyn Agent>>, RunnerError> {
        let config = cell.config(game_seed);
        let mut agents: Vec<Box<dyn Agent>> = Vec::with_capacity(cell.agents.len());
        for (seat, spec) in cell.agents.iter().enumerate() {
            let name = spec.display_name();
            let profile = AgentProfile {
                id: format!("p{}:{name}", seat + 1),
                display_name: name.to_string(),
                opponent_label: opponent_label(cell.study, cell.condition, name),
                system_prompt: Some(self.prompts.build_system_prompt(&config, spec.persona, name)?),
            };
            match &spec.kind {
                AgentKind::Scripted { strategy, .. } => agents.push(Box::new(ScriptedAgent::new(
                    strategy.clone(),
                    profile,
                    derive_game_seed(game_seed, seat as u64),
                ))),
                AgentKind::Llm {
                    provider,
                    model,
                    temperature,
                    ..
                } => {
                    let gateway = self
                        .gateway
                        .clone()
                        .ok_or_else(|| RunnerError::NoGateway(profile.id.clone()))?;
                    agents.push(Box::new(
                        LlmAgent::new(gateway, provider, model, *temperature, profile)
                            .with_session_key(format!("{game_seed:016x}-p{seat}"))
                            .with_strictness(self.strictness)
                            .with_max_reprompts(self.max_reprompts),
                    ));
                }
            }
        }
        Ok(agents)
    }

    pub fn run_game(&self, cell: &ConditionCell, game_seed: u64) -> Result<GameTranscript, RunnerError> {
        let config = cell.config(game_seed);
        let mut agents = self.build_agents(cell, game_seed)?;
        let transcript = play_game(&config, &mut agents, game_seed)?;
        check_framing(&transcript)?;
        Ok(transcript)
    }

    /// Runs `cell.games` games on up to `parallelism` threads. Output order is by game index
    /// whatever the completion order.
    pub fn run_batch(
        &self,
        cell: &ConditionCell,
        master_seed: u64,
        parallelism: usize,
    ) -> Result<BatchResult, RunnerError> {
        if parallelism == 0 {
            return Err(RunnerError::Parallelism);
        }
        cell.config(master_seed).validate()?;
        let transcripts = parallel_map(cell.games as usize, parallelism, |index| {
            self.run_game(cell, derive_game_seed(master_seed, index as u64))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Ok(BatchResult::new(cell.clone(), master_seed, transcripts))
    }
}

/// Applies `f` to `0..n` on up to `parallelism` scoped threads; results are in index order.
pub fn parallel_map<T, F>(n: usize, parallelism: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..parallelism.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= n {
                    break;
                }
                let value = f(index);
                slots.lock().unwrap_or_else(|e| e.into_inner())[index] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|slot| slot.expect("every index is claimed"))
        .collect()
}

/// Name prompts state the agent's own display name; NoName prompts use the study's
/// anonymous framing.
pub fn check_framing(transcript: &GameTranscript) -> Result<(), RunnerError> {
    let study = transcript.config.study_style;
    for (seat, prompt) in transcript.system_prompts.iter().enumerate() {
        let Some(prompt) = prompt else { continue };
        let name = &transcript.display_names[seat];
        let ok = match transcript.config.condition {
            Condition::Name => prompt.contains(name.as_str()),
            Condition::NoName => prompt.contains(noname_phrase(study)),
        };
        if !ok {
            return Err(RunnerError::Framing(format!(
                "seat {seat} ({name}) under {}",
                transcript.config.condition
            )));
        }
    }
    Ok(())
}
