#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use pgg_core::agents::{PromptStore, TemplateVariant};
use pgg_core::game::{Condition, GameConfig, Persona, StudyStyle};
use pgg_core::gateway::{Gateway, PoisonedTransport, RecordReplay, ReplayMode, TransportPolicy};
use pgg_core::runner::transcripts::render_transcripts;
use pgg_core::runner::{load_transcripts, Harness};

pub const STUDIES: [StudyStyle; 3] = [StudyStyle::Study1, StudyStyle::Study2, StudyStyle::Study3];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests/golden")
}

pub fn replay_dir() -> PathBuf {
    crate_dir().join("tests/fixtures/replay")
}

pub fn replay_session() -> PathBuf {
    replay_dir().join("session.jsonl")
}

pub fn replay_transcript() -> PathBuf {
    replay_dir().join("study1-CS-name.jsonl")
}

pub fn pgg() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_pgg"))
}

fn golden_name(study: StudyStyle, persona: Persona, condition: Condition) -> String {
    format!("study{}_{}_{}.txt", study.number(), persona.as_str(), condition.as_str())
}

/// Every rendered template that differs from its golden file, as a description. The
/// as-printed goldens cover all 18 templates; the corrected directory overrides some.
pub fn golden_mismatches(variant: TemplateVariant) -> Vec<String> {
    let store = PromptStore::new(variant);
    let mut bad = Vec::new();
    for study in STUDIES {
        for persona in Persona::ALL {
            for condition in Condition::ALL {
                let name = golden_name(study, persona, condition);
                let printed = golden_dir().join("as_printed").join(&name);
                let corrected = golden_dir().join("corrected").join(&name);
                let path = if variant == TemplateVariant::Corrected && corrected.exists() {
                    corrected
                } else {
                    printed
                };
                let expected = match std::fs::read_to_string(&path) {
                    Ok(t) => t,
                    Err(e) => {
                        bad.push(format!("{}: {e}", path.display()));
                        continue;
                    }
                };
                let config = GameConfig::new(study, vec![persona; study.num_players()], condition);
                match store.build_system_prompt(&config, persona, "<MODEL-NAME>") {
                    Ok(text) if text == expected => {}
                    Ok(_) => bad.push(format!("{name} ({variant:?}) differs")),
                    Err(e) => bad.push(format!("{name}: {e}")),
                }
            }
        }
    }
    bad
}

pub struct ReplayOutcome {
    pub rendered: String,
    pub recorded: String,
    pub poisoned_touches: usize,
    pub invalid_games: usize,
}

/// Re-plays the recorded game from its fixture with a transport that fails on any call.
pub fn replay_recorded_game(session: &Path, transcript: &Path) -> ReplayOutcome {
    let recorded = std::fs::read_to_string(transcript).expect("recorded transcript");
    let stored = load_transcripts(transcript).expect("recorded transcript parses");
    let poisoned = Arc::new(PoisonedTransport::default());
    let replay = RecordReplay::open(session, ReplayMode::Replay, poisoned.clone()).expect("fixture loads");
    let policy = TransportPolicy {
        retry_budget: 0,
        ..TransportPolicy::default()
    };
    let gateway = Arc::new(Gateway::new(Arc::new(replay), policy).unwrap());
    let batch = Harness::with_gateway(gateway)
        .run_batch(&stored.cell, stored.master_seed, 1)
        .expect("replayed batch");
    ReplayOutcome {
        rendered: render_transcripts(&batch),
        recorded,
        poisoned_touches: poisoned.touches(),
        invalid_games: batch.invalid_count,
    }
}
