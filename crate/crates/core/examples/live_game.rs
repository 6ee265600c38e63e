//! One short game against a real provider. Needs an API key, e.g. OPENAI_API_KEY, and
//! records the exchange so it can be replayed offline later.
//!
//! OPENAI_API_KEY=... cargo run --example live_game -- openai gpt-4o

use std::sync::Arc;
use std::time::Duration;

use pgg_core::agents::AgentSpec;
use pgg_core::game::{Condition, StudyStyle};
use pgg_core::gateway::{Gateway, HttpTransport, ProviderConfig, RecordReplay, ReplayMode, TransportPolicy};
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let provider = args.next().unwrap_or_else(|| "openai".into());
    let model = args.next().unwrap_or_else(|| "gpt-4o".into());
    let Some(config) = ProviderConfig::defaults().into_iter().find(|p| p.name == provider) else {
        eprintln!("unknown provider {provider}");
        return Ok(());
    };
    if config.api_key().is_err() {
        eprintln!("{} is not set; skipping the live game", config.api_key_env);
        return Ok(());
    }

    let spec: AgentSpec = format!("llm:{provider}/{model}@{model}").parse()?;
    let cell = enumerate_conditions(StudyStyle::Study1, &[spec.clone(), spec], Some(1))?
        .into_iter()
        .find(|c| c.condition == Condition::Name && c.pairing() == "NN")
        .expect("neutral cell")
        .with_rounds(3);

    let policy = TransportPolicy::default();
    let http = Arc::new(HttpTransport::with_defaults(Duration::from_secs(60)));
    let fixture = std::env::temp_dir().join("pgg-live-game.jsonl");
    let recorder = RecordReplay::open(&fixture, ReplayMode::Record, http)?;
    let gateway = Arc::new(Gateway::new(Arc::new(recorder), policy)?);
    let batch = Harness::with_gateway(gateway.clone()).run_batch(&cell, 1, 1)?;

    let t = &batch.transcripts[0];
    println!("valid: {} {}", t.valid, t.abort_reason.as_deref().unwrap_or(""));
    for r in &t.rounds {
        println!("round {}: {:?} {:?}", r.round_index, r.contributions, r.reasoning);
    }
    println!("gateway: {:?}; fixture at {}", gateway.stats(), fixture.display());
    Ok(())
}
