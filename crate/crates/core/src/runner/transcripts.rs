//! Transcript files.
//!
//! One JSON object per line, one line per game, in game-index order. Keys appear in this
//! order on every line:
//!
//! | key              | content                                                        |
//! |------------------|----------------------------------------------------------------|
//! | `schema_version` | currently `1`; any other value is refused on load              |
//! | `cell`           | the [`ConditionCell`] (study, condition, seat specs, sizes)    |
//! | `master_seed`    | batch seed the game seed was derived from                     |
//! | `game_index`     | 0-based position in the batch                                  |
//! | `game_seed`      | derived per-game seed                                         |
//! | `valid`          | `false` when an agent failed and the game was cut short        |
//! | `abort_reason`   | failure description, or `null`                                 |
//! | `agent_ids`      | `p<seat>:<display name>` per seat                              |
//! | `display_names`  | names injected into prompts                                    |
//! | `system_prompts` | exact system prompt per seat                                   |
//! | `config`         | resolved [`GameConfig`](crate::game::GameConfig)               |
//! | `rounds`         | [`RoundRecord`](crate::game::RoundRecord)s, points as decimals |
//! | `exchanges`      | per seat, every `{round, prompt, response}` in order           |
//!
//! Nothing time-dependent is written, so a rerun with the same seed reproduces the file
//! byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{BatchResult, ConditionCell};
use crate::game::{Exchange, GameConfig, GameTranscript, RoundRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: schema version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersionMismatch { path: String, line: usize, found: String },
    #[error("{path} line {line}: {message}")]
    CorruptLine {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path} line {line}: game belongs to a different cell or batch than line 1")]
    MixedCells { path: String, line: usize },
    #[error("{0}: no games")]
    Empty(String),
}

impl TranscriptError {
    /// 1-based line number for per-line errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            TranscriptError::SchemaVersionMismatch { line, .. }
            | TranscriptError::CorruptLine { line, .. }
            | TranscriptError::MixedCells { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TranscriptLine {
    schema_version: u32,
    cell: ConditionCell,
    master_seed: u64,
    game_index: usize,
    game_seed: u64,
    valid: bool,
    abort_reason: Option<String>,
    agent_ids: Vec<String>,
    display_names: Vec<String>,
    system_prompts: Vec<Option<String>>,
    config: GameConfig,
    rounds: Vec<RoundRecord>,
    exchanges: Vec<Vec<Exchange>>,
}

/// Serializes one batch, one line per game.
pub fn render_transcripts(batch: &BatchResult) -> String {
    let mut out = String::new();
    for (game_index, t) in batch.transcripts.iter().enumerate() {
        let line = TranscriptLine {
            schema_version: SCHEMA_VERSION,
            cell: batch.cell.clone(),
            master_seed: batch.master_seed,
            game_index,
            game_seed: t.game_seed,
            valid: t.valid,
            abort_reason: t.abort_reason.clone(),
            agent_ids: t.agent_ids.clone(),
            display_names: t.display_names.clone(),
            system_prompts: t.system_prompts.clone(),
            config: t.config.clone(),
            rounds: t.rounds.clone(),
            exchanges: t.raw_exchanges.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("transcript serializes"));
        out.push('\n');
    }
    out
}

pub fn persist_transcripts(batch: &BatchResult, path: &Path) -> Result<(), TranscriptError> {
    let io = |source| TranscriptError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut writer = BufWriter::new(File::create(path).map_err(io)?);
    writer
        .write_all(render_transcripts(batch).as_bytes())
        .and_then(|_| writer.flush())
        .map_err(io)
}

pub fn load_transcripts(path: &Path) -> Result<BatchResult, TranscriptError> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|source| TranscriptError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut head: Option<(ConditionCell, u64)> = None;
    let mut transcripts = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|source| TranscriptError::Io {
            path: shown.clone(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| TranscriptError::CorruptLine {
            path: shown.clone(),
            line: line_no,
            message,
        };
        let value: Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        match value.get("schema_version") {
            Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
            other => {
                return Err(TranscriptError::SchemaVersionMismatch {
                    path: shown.clone(),
                    line: line_no,
                    found: other.map_or_else(|| "missing".into(), Value::to_string),
                })
            }
        }
        let record: TranscriptLine =
            serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        match &head {
            None => head = Some((record.cell.clone(), record.master_seed)),
            Some((cell, seed)) => {
                if *cell != record.cell || *seed != record.master_seed {
                    return Err(TranscriptError::MixedCells {
                        path: shown.clone(),
                        line: line_no,
                    });
                }
            }
        }
        transcripts.push(GameTranscript {
            config: record.config,
            agent_ids: record.agent_ids,
            display_names: record.display_names,
            system_prompts: record.system_prompts,
            rounds: record.rounds,
            raw_exchanges: record.exchanges,
            game_seed: record.game_seed,
            valid: record.valid,
            abort_reason: record.abort_reason,
        });
    }
    let (cell, master_seed) = head.ok_or(TranscriptError::Empty(shown))?;
    Ok(BatchResult::new(cell, master_seed, transcripts))
}
