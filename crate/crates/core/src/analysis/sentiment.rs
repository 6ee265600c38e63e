//! Judge-model sentiment scores for reasoning text, and their rank correlation with
//! contributions.

use std::collections::BTreeMap;
use std::sync::Arc;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mask::Masker;
use super::spearman::{spearman, Correlation};
use super::stats::{mean, seat_labels};
use super::StatsError;
use crate::gateway::{ChatMessage, ChatRequest, Gateway, GatewayError};
use crate::runner::{parallel_map, BatchResult};

pub const RUBRIC_V1: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/templates/judge/sentiment_v1.txt"
));

/// Phrase identifying a judge system prompt.
pub const RUBRIC_MARKER: &str = "cooperation score between 0 and 1";

pub const JUDGE_TEMPERATURE: f64 = 0.1;
pub const JUDGE_ATTEMPTS: u32 = 3;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("text is not masked; masking would change it")]
    NotMasked,
    #[error("judge gave no usable score after {attempts} attempts, last reply {last:?}")]
    JudgeUnparseable { attempts: u32, last: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub cell: String,
    /// Game seed.
    pub game_id: u64,
    pub round: u32,
    pub player: usize,
    pub contribution: u32,
    pub score: f64,
    pub masked_text: String,
    pub raw_text: String,
}

pub struct Judge {
    gateway: Arc<Gateway>,
    provider: String,
    model: String,
    temperature: f64,
    attempts: u32,
}

impl Judge {
    pub fn new(gateway: Arc<Gateway>, provider: impl Into<String>, model: impl Into<String>) -> Self {
        Judge {
            gateway,
            provider: provider.into(),
            model: model.into(),
            temperature: JUDGE_TEMPERATURE,
            attempts: JUDGE_ATTEMPTS,
        }
    }

    /// Scores text that is already masked. `masker` re-checks that.
    pub fn score_masked(
        &self,
        masked_text: &str,
        masker: &Masker,
        session_key: Option<String>,
    ) -> Result<f64, SentimentError> {
        if !masker.is_masked(masked_text) {
            return Err(SentimentError::NotMasked);
        }
        let mut messages = vec![ChatMessage::system(RUBRIC_V1), ChatMessage::user(masked_text)];
        let mut last = String::new();
        for _ in 0..self.attempts {
            last = self.gateway.chat_complete(&ChatRequest {
                provider: self.provider.clone(),
                model: self.model.clone(),
                messages: messages.clone(),
                temperature: self.temperature,
                session_key: session_key.clone(),
            })?;
            if let Some(score) = parse_score(&last) {
                return Ok(score);
            }
            messages.push(ChatMessage::assistant(last.clone()));
            messages.push(ChatMessage::user(
                "That reply was not a single number between 0 and 1. Reply with the number only.",
            ));
        }
        Err(SentimentError::JudgeUnparseable {
            attempts: self.attempts,
            last,
        })
    }

    /// Scores every reasoning text of the batch's valid games, in game, round, seat order.
    pub fn score_batch(
        &self,
        batch: &BatchResult,
        parallelism: usize,
    ) -> Result<Vec<SentimentRecord>, SentimentError> {
        let names: Vec<&str> = batch.cell.agents.iter().map(|a| a.display_name()).collect();
        let masker = Masker::new(&names);
        let cell = batch.cell.label();
        let mut jobs = Vec::new();
        for t in batch.valid() {
            for r in &t.rounds {
                for (seat, reasoning) in r.reasoning.iter().enumerate() {
                    if let Some(text) = reasoning {
                        jobs.push((t.game_seed, r.round_index, seat, r.contributions[seat], text));
                    }
                }
            }
        }
        parallel_map(jobs.len(), parallelism, |i| {
            let (game_id, round, player, contribution, raw) = jobs[i];
            let masked = masker.mask(raw);
            let key = format!("judge-{game_id:016x}-r{round}-p{player}");
            let score = self.score_masked(&masked, &masker, Some(key))?;
            Ok(SentimentRecord {
                cell: cell.clone(),
                game_id,
                round,
                player,
                contribution,
                score,
                masked_text: masked,
                raw_text: raw.clone(),
            })
        })
        .into_iter()
        .collect()
    }
}

/// A reply containing exactly one number, within `[0, 1]`.
pub fn parse_score(reply: &str) -> Option<f64> {
    static NUMBER: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = NUMBER.get_or_init(|| Regex::new(r"-?(?:\d+(?:\.\d+)?|\.\d+)").unwrap());
    let mut found = re.find_iter(reply);
    let first = found.next()?;
    if found.next().is_some() {
        return None;
    }
    let value: f64 = first.as_str().parse().ok()?;
    (0.0..=1.0).contains(&value).then_some(value)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpearmanMode {
    /// One point per scored reasoning text.
    #[default]
    Raw,
    /// One point per round: mean score against mean contribution across games.
    RoundAveraged,
}

impl std::str::FromStr for SpearmanMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(SpearmanMode::Raw),
            "averaged" | "round_averaged" | "round-averaged" => Ok(SpearmanMode::RoundAveraged),
            other => Err(format!("unknown spearman mode {other:?}")),
        }
    }
}

/// Score against contribution for records of a single seat of a single cell.
pub fn sentiment_spearman(
    records: &[SentimentRecord],
    mode: SpearmanMode,
) -> Result<(Correlation, usize), StatsError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = match mode {
        SpearmanMode::Raw => records.iter().map(|r| (r.score, r.contribution as f64)).unzip(),
        SpearmanMode::RoundAveraged => {
            let mut by_round: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for r in records {
                let e = by_round.entry(r.round).or_default();
                e.0.push(r.score);
                e.1.push(r.contribution as f64);
            }
            by_round.values().map(|(s, c)| (mean(s), mean(c))).unzip()
        }
    };
    Ok((spearman(&xs, &ys)?, xs.len()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub cell: String,
    pub seat: usize,
    pub player: String,
    pub mode: SpearmanMode,
    pub correlation: Correlation,
    pub n: usize,
}

/// One correlation per (cell, seat).
pub fn correlation_grid(
    batches: &[(&BatchResult, &[SentimentRecord])],
    mode: SpearmanMode,
) -> Result<Vec<CorrelationCell>, StatsError> {
    let mut out = Vec::new();
    for (batch, records) in batches {
        let names: Vec<String> = batch
            .cell
            .agents
            .iter()
            .map(|a| a.display_name().to_string())
            .collect();
        for (seat, player) in seat_labels(&names).into_iter().enumerate() {
            let seat_records: Vec<SentimentRecord> =
                records.iter().filter(|r| r.player == seat).cloned().collect();
            if seat_records.len() < 2 {
                continue;
            }
            let (correlation, n) = sentiment_spearman(&seat_records, mode)?;
            out.push(CorrelationCell {
                cell: batch.cell.label(),
                seat,
                player,
                mode,
                correlation,
                n,
            });
        }
    }
    Ok(out)
}
