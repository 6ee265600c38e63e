//! The iterated public goods game.
//!
//! Each round every player receives the endowment `E`, privately contributes `c_i` in
//! `0..=E`, and the pooled total `T` is multiplied by `m` and split evenly, so player `i`
//! gains `(E - c_i) + m * T / N`. With `1 < m < N` contributing nothing is dominant in the
//! one-shot game even though full contribution maximizes welfare.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::render::{render_round_request, render_round_summary, rules_reminder};
use crate::agents::{Agent, HistoryEntry, Observation};
use crate::points::{Multiplier, Points};

pub const DEFAULT_ROUNDS: u32 = 20;
pub const DEFAULT_ENDOWMENT: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid game config: {0}")]
    InvalidConfig(String),
    #[error("player {player} contributed {contribution}, outside 0..={endowment}")]
    ContributionOutOfRange {
        player: usize,
        contribution: u32,
        endowment: u32,
    },
    #[error("expected {expected} players, got {got}")]
    WrongPlayerCount { expected: usize, got: usize },
    #[error("game already finished after {rounds} rounds")]
    GameFinished { rounds: u32 },
    #[error("others' total {total} exceeds {max} for this config")]
    OthersTotalOutOfRange { total: u32, max: u32 },
}

/// Whether the system prompt names the opponent (as the agent's own model) or calls it
/// another AI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    NoName,
    Name,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::NoName, Condition::Name];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::NoName => "noname",
            Condition::Name => "name",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "noname" => Ok(Condition::NoName),
            "name" => Ok(Condition::Name),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

/// System-prompt persona prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persona {
    Collective,
    Neutral,
    Selfish,
}

impl Persona {
    pub const ALL: [Persona; 3] = [Persona::Collective, Persona::Neutral, Persona::Selfish];

    pub fn letter(self) -> char {
        match self {
            Persona::Collective => 'C',
            Persona::Neutral => 'N',
            Persona::Selfish => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Persona> {
        match c.to_ascii_uppercase() {
            'C' => Some(Persona::Collective),
            'N' => Some(Persona::Neutral),
            'S' => Some(Persona::Selfish),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Persona::Collective => "collective",
            Persona::Neutral => "neutral",
            Persona::Selfish => "selfish",
        }
    }
}

/// Pairing label such as `"CS"` (first player collective, second selfish).
pub fn pairing_label(personas: &[Persona]) -> String {
    personas.iter().map(|p| p.letter()).collect()
}

/// Protocol variant: prompt wording, per-round reminders, and whether reasoning is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyStyle {
    Study1,
    Study2,
    Study3,
}

impl StudyStyle {
    pub fn number(self) -> u8 {
        match self {
            StudyStyle::Study1 => 1,
            StudyStyle::Study2 => 2,
            StudyStyle::Study3 => 3,
        }
    }

    pub fn num_players(self) -> usize {
        match self {
            StudyStyle::Study1 | StudyStyle::Study2 => 2,
            StudyStyle::Study3 => 4,
        }
    }

    /// Only the first study asks for reasoning before the contribution.
    pub fn expects_reasoning(self) -> bool {
        matches!(self, StudyStyle::Study1)
    }

    /// Only the first study restates the rules and the opponent each round.
    pub fn reminds_each_round(self) -> bool {
        matches!(self, StudyStyle::Study1)
    }

    pub fn default_games(self) -> u32 {
        match self {
            StudyStyle::Study1 | StudyStyle::Study2 => 100,
            StudyStyle::Study3 => 50,
        }
    }
}

impl fmt::Display for StudyStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Study {}", self.number())
    }
}

impl std::str::FromStr for StudyStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace([' ', '-', '_'], "").as_str() {
            "study1" | "1" => Ok(StudyStyle::Study1),
            "study2" | "2" => Ok(StudyStyle::Study2),
            "study3" | "3" => Ok(StudyStyle::Study3),
            other => Err(format!("unknown study {other:?}")),
        }
    }
}

/// Full parameterization of one experimental cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub num_players: usize,
    pub num_rounds: u32,
    pub endowment: u32,
    pub multiplier: Multiplier,
    pub condition: Condition,
    pub personas: Vec<Persona>,
    pub study_style: StudyStyle,
    pub games: u32,
    pub seed: u64,
}

impl GameConfig {
    /// Config with the standard parameters (20 rounds, endowment 10, multiplier 1.6).
    pub fn new(study_style: StudyStyle, personas: Vec<Persona>, condition: Condition) -> Self {
        GameConfig {
            num_players: personas.len(),
            num_rounds: DEFAULT_ROUNDS,
            endowment: DEFAULT_ENDOWMENT,
            multiplier: Multiplier::default(),
            condition,
            personas,
            study_style,
            games: study_style.default_games(),
            seed: 0,
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.num_rounds = rounds;
        self
    }

    pub fn with_multiplier(mut self, multiplier: Multiplier) -> Self {
        self.multiplier = multiplier;
        self
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let invalid = |msg: String| Err(GameError::InvalidConfig(msg));
        let n = self.num_players;
        if n < 2 {
            return invalid(format!("need at least 2 players, got {n}"));
        }
        if n != self.study_style.num_players() {
            return invalid(format!(
                "{} is played with {} players, got {n}",
                self.study_style,
                self.study_style.num_players()
            ));
        }
        if self.num_rounds < 1 {
            return invalid("need at least 1 round".into());
        }
        if self.games < 1 {
            return invalid("batch size must be at least 1".into());
        }
        let m = self.multiplier.tenths() as usize;
        if m <= 10 || m >= 10 * n {
            return invalid(format!(
                "multiplier {} must lie strictly between 1 and {n}",
                self.multiplier
            ));
        }
        // Each point in the pool returns m/N to every player; keep that on the tenths grid.
        if !m.is_multiple_of(n) {
            return invalid(format!(
                "multiplier {} split {n} ways is not a whole number of tenths",
                self.multiplier
            ));
        }
        if self.personas.len() != n {
            return invalid(format!(
                "{} personas for {n} players",
                self.personas.len()
            ));
        }
        if self.study_style == StudyStyle::Study3
            && self.personas.windows(2).any(|w| w[0] != w[1])
        {
            return invalid("Study 3 requires identical personas for every player".into());
        }
        Ok(())
    }

    /// Gain difference from contributing one more point, all else fixed: `m/N - 1`.
    pub fn marginal_return_per_point(&self) -> Points {
        Points::from_tenths(self.multiplier.tenths() as i64 / self.num_players as i64 - 10)
    }
}

/// Per-player gains for one round.
pub fn round_payoff(
    contributions: &[u32],
    endowment: u32,
    multiplier: Multiplier,
    num_players: usize,
) -> Result<Vec<Points>, GameError> {
    if contributions.len() != num_players {
        return Err(GameError::WrongPlayerCount {
            expected: num_players,
            got: contributions.len(),
        });
    }
    if let Some((player, &c)) = contributions
        .iter()
        .enumerate()
        .find(|(_, &c)| c > endowment)
    {
        return Err(GameError::ContributionOutOfRange {
            player,
            contribution: c,
            endowment,
        });
    }
    let total: i64 = contributions.iter().map(|&c| c as i64).sum();
    // m is in tenths, so m * T / N is already the share in tenths.
    let share = multiplier.tenths() as i64 * total / num_players as i64;
    Ok(contributions
        .iter()
        .map(|&c| Points::whole(endowment as i64 - c as i64) + Points::from_tenths(share))
        .collect())
}

/// One completed round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: u32,
    pub contributions: Vec<u32>,
    pub total: u32,
    pub gains: Vec<Points>,
    pub cumulative: Vec<Points>,
    /// Reasoning text per player, verbatim, when the protocol asks for it.
    #[serde(default)]
    pub reasoning: Vec<Option<String>>,
}

#[derive(Clone, Debug)]
pub struct GameState {
    config: GameConfig,
    cumulative: Vec<Points>,
    rounds: Vec<RoundRecord>,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        Ok(GameState {
            cumulative: vec![Points::ZERO; config.num_players],
            rounds: Vec::with_capacity(config.num_rounds as usize),
            config,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn cumulative(&self) -> &[Points] {
        &self.cumulative
    }

    pub fn rounds_played(&self) -> u32 {
        self.rounds.len() as u32
    }

    pub fn is_finished(&self) -> bool {
        self.rounds_played() >= self.config.num_rounds
    }

    pub fn advance_round(&mut self, contributions: &[u32]) -> Result<RoundRecord, GameError> {
        self.advance(contributions, Vec::new())
    }

    pub(crate) fn advance(
        &mut self,
        contributions: &[u32],
        reasoning: Vec<Option<String>>,
    ) -> Result<RoundRecord, GameError> {
        if self.is_finished() {
            return Err(GameError::GameFinished {
                rounds: self.config.num_rounds,
            });
        }
        let gains = round_payoff(
            contributions,
            self.config.endowment,
            self.config.multiplier,
            self.config.num_players,
        )?;
        for (cum, gain) in self.cumulative.iter_mut().zip(&gains) {
            *cum += *gain;
        }
        let record = RoundRecord {
            round_index: self.rounds_played() + 1,
            contributions: contributions.to_vec(),
            total: contributions.iter().sum(),
            gains,
            cumulative: self.cumulative.clone(),
            reasoning,
        };
        self.rounds.push(record.clone());
        Ok(record)
    }

    pub fn into_rounds(self) -> Vec<RoundRecord> {
        self.rounds
    }
}

/// One prompt/response pair as seen by a single player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub round: u32,
    pub prompt: String,
    pub response: String,
}

/// Immutable log of one game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub config: GameConfig,
    pub agent_ids: Vec<String>,
    pub display_names: Vec<String>,
    pub system_prompts: Vec<Option<String>>,
    pub rounds: Vec<RoundRecord>,
    pub raw_exchanges: Vec<Vec<Exchange>>,
    pub game_seed: u64,
    pub valid: bool,
    pub abort_reason: Option<String>,
}

impl GameTranscript {
    pub fn final_scores(&self) -> Vec<Points> {
        self.rounds
            .last()
            .map(|r| r.cumulative.clone())
            .unwrap_or_else(|| vec![Points::ZERO; self.config.num_players])
    }

    /// Mean contribution of one player across all recorded rounds.
    pub fn mean_contribution(&self, player: usize) -> Option<f64> {
        if self.rounds.is_empty() {
            return None;
        }
        let sum: u64 = self.rounds.iter().map(|r| r.contributions[player] as u64).sum();
        Some(sum as f64 / self.rounds.len() as f64)
    }
}

/// Runs a full game. Agent failures do not error: the partial transcript comes back with
/// `valid = false` and the failure in `abort_reason`.
pub fn play_game(
    config: &GameConfig,
    agents: &mut [Box<dyn Agent>],
    game_seed: u64,
) -> Result<GameTranscript, GameError> {
    config.validate()?;
    if agents.len() != config.num_players {
        return Err(GameError::WrongPlayerCount {
            expected: config.num_players,
            got: agents.len(),
        });
    }

    let mut state = GameState::new(config.clone())?;
    let mut exchanges: Vec<Vec<Exchange>> = vec![Vec::new(); agents.len()];
    let mut abort_reason = None;
    let expects_reasoning = config.study_style.expects_reasoning();

    'rounds: while !state.is_finished() {
        let round_index = state.rounds_played() + 1;
        let previous = state.rounds().last().cloned();
        let mut decisions = Vec::with_capacity(agents.len());

        // Every decision is collected before any is applied.
        for (player, agent) in agents.iter_mut().enumerate() {
            let opponent_label = agent.profile().opponent_label.clone();
            let mut message = String::new();
            if let Some(prev) = &previous {
                match render_round_summary(prev, player, config, &opponent_label) {
                    Ok(summary) => message.push_str(&summary),
                    Err(err) => {
                        abort_reason = Some(err.to_string());
                        break 'rounds;
                    }
                }
                message.push_str("\n\n");
            }
            message.push_str(&render_round_request(round_index, config));

            let observation = Observation {
                round_index,
                num_rounds: config.num_rounds,
                num_players: config.num_players,
                player_index: player,
                endowment: config.endowment,
                history: history_for(state.rounds(), player),
                rules_reminder: config
                    .study_style
                    .reminds_each_round()
                    .then(|| rules_reminder(config, &opponent_label)),
                opponent_label,
                message,
                expects_reasoning,
            };

            match agent.decide(&observation) {
                Ok(turn) => {
                    exchanges[player].extend(turn.exchanges.into_iter().map(|(prompt, response)| {
                        Exchange {
                            round: round_index,
                            prompt,
                            response,
                        }
                    }));
                    decisions.push(turn.decision);
                }
                Err(err) => {
                    abort_reason = Some(format!(
                        "player {player} ({}) failed in round {round_index}: {err}",
                        agent.profile().id
                    ));
                    exchanges[player].extend(err.exchanges().iter().map(|(p, r)| Exchange {
                        round: round_index,
                        prompt: p.clone(),
                        response: r.clone(),
                    }));
                    break 'rounds;
                }
            }
        }

        let contributions: Vec<u32> = decisions.iter().map(|d| d.contribution).collect();
        let reasoning = decisions.into_iter().map(|d| d.reasoning).collect();
        if let Err(err) = state.advance(&contributions, reasoning) {
            abort_reason = Some(err.to_string());
            break;
        }
    }

    let valid = abort_reason.is_none();
    Ok(GameTranscript {
        config: config.clone(),
        agent_ids: agents.iter().map(|a| a.profile().id.clone()).collect(),
        display_names: agents
            .iter()
            .map(|a| a.profile().display_name.clone())
            .collect(),
        system_prompts: agents
            .iter()
            .map(|a| a.profile().system_prompt.clone())
            .collect(),
        rounds: state.into_rounds(),
        raw_exchanges: exchanges,
        game_seed,
        valid,
        abort_reason,
    })
}

fn history_for(rounds: &[RoundRecord], player: usize) -> Vec<HistoryEntry> {
    rounds
        .iter()
        .map(|r| HistoryEntry {
            round_index: r.round_index,
            total: r.total,
            own_contribution: r.contributions[player],
            own_gain: r.gains[player],
            own_cumulative: r.cumulative[player],
        })
        .collect()
}

/// Contribution in `0..=E` maximizing the player's own one-round gain given what the
/// others put in, found by trying every option. Ties go to the smaller contribution.
pub fn best_response_oracle(others_total: u32, config: &GameConfig) -> Result<u32, GameError> {
    config.validate()?;
    let n = config.num_players;
    let max = config.endowment * (n as u32 - 1);
    if others_total > max {
        return Err(GameError::OthersTotalOutOfRange {
            total: others_total,
            max,
        });
    }
    // Spread the others' total over the remaining seats; only the sum matters.
    let mut profile = vec![0u32; n];
    let mut remaining = others_total;
    for seat in profile.iter_mut().skip(1) {
        *seat = remaining.min(config.endowment);
        remaining -= *seat;
    }

    let mut best = (0u32, None::<Points>);
    for c in 0..=config.endowment {
        profile[0] = c;
        let gain = round_payoff(&profile, config.endowment, config.multiplier, n)?[0];
        if best.1.is_none_or(|g| gain > g) {
            best = (c, Some(gain));
        }
    }
    Ok(best.0)
}
