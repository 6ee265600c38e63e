//! Records a two-model game through the simulated model, then replays it with a transport
//! that fails on any call, and checks the transcripts match byte for byte.
//!
//! cargo run --example replay_session

use std::sync::Arc;

use pgg_core::agents::AgentSpec;
use pgg_core::game::{Condition, StudyStyle};
use pgg_core::gateway::{Gateway, MockTransport, PoisonedTransport, RecordReplay, ReplayMode, TransportPolicy};
use pgg_core::report::validate_batch;
use pgg_core::runner::transcripts::render_transcripts;
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("pgg-replay-example");
    let specs: Vec<AgentSpec> = vec![
        "llm:openai/gpt-4o@GPT-4o".parse()?,
        "llm:anthropic/claude-sonnet-4@Claude Sonnet 4".parse()?,
    ];
    let cell = enumerate_conditions(StudyStyle::Study1, &specs, Some(2))?
        .into_iter()
        .find(|c| c.condition == Condition::Name && c.pairing() == "CS")
        .expect("CS name cell");

    let recorder = RecordReplay::for_session(&dir, "demo", ReplayMode::Record, Arc::new(MockTransport::simulated()))?;
    let fixture = recorder.path().to_path_buf();
    let gateway = Arc::new(Gateway::new(Arc::new(recorder), TransportPolicy::default())?);
    let recorded = Harness::with_gateway(gateway.clone()).run_batch(&cell, 99, 2)?;
    println!("recorded {} calls into {}", gateway.stats().requests, fixture.display());

    let poisoned = Arc::new(PoisonedTransport::default());
    let replay = RecordReplay::open(&fixture, ReplayMode::Replay, poisoned.clone())?;
    let offline = Arc::new(Gateway::new(Arc::new(replay), TransportPolicy::default())?);
    let replayed = Harness::with_gateway(offline).run_batch(&cell, 99, 2)?;

    let same = render_transcripts(&recorded) == render_transcripts(&replayed);
    println!("replay identical: {same}; network touches: {}", poisoned.touches());
    println!("violations: {}", validate_batch(&replayed, "replayed").len());

    let t = &replayed.transcripts[0];
    for r in t.rounds.iter().take(3) {
        println!(
            "round {}: {:?} | {}",
            r.round_index,
            r.contributions,
            r.reasoning[0].as_deref().unwrap_or("-")
        );
    }
    assert!(same);
    Ok(())
}
