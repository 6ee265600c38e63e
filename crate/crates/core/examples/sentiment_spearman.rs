//! Masks reasoning, scores it with a judge (the simulated model here) and correlates the
//! scores with contributions.
//!
//! cargo run --example sentiment_spearman

use std::sync::Arc;

use pgg_core::agents::AgentSpec;
use pgg_core::analysis::{correlation_grid, mask_reasoning, Judge, SpearmanMode};
use pgg_core::game::StudyStyle;
use pgg_core::gateway::{Gateway, MockTransport, TransportPolicy};
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = ["GPT-4o", "Claude Sonnet 4"];
    for text in [
        "Claude Sonnet 4 matched me, so I trust the other AI.",
        "As an AI model I will keep points; GPT-4o defected.",
    ] {
        println!("{text:?}\n  -> {:?}", mask_reasoning(text, &names));
    }

    let gateway = Arc::new(Gateway::new(Arc::new(MockTransport::simulated()), TransportPolicy::default())?);
    let specs: Vec<AgentSpec> = vec![
        "llm:openai/gpt-4o@GPT-4o".parse()?,
        "llm:anthropic/claude-sonnet-4@Claude Sonnet 4".parse()?,
    ];
    let cells = enumerate_conditions(StudyStyle::Study1, &specs, Some(5))?;
    let harness = Harness::with_gateway(gateway.clone());
    let judge = Judge::new(gateway, "openai", "gpt-4o");

    let mut scored = Vec::new();
    for cell in cells.iter().filter(|c| c.pairing() == "CS") {
        let batch = harness.run_batch(cell, 7, 4)?;
        let records = judge.score_batch(&batch, 4)?;
        scored.push((batch, records));
    }
    let pairs: Vec<_> = scored.iter().map(|(b, r)| (b, r.as_slice())).collect();
    for mode in [SpearmanMode::Raw, SpearmanMode::RoundAveraged] {
        for c in correlation_grid(&pairs, mode)? {
            let rho = c.correlation.rho().map_or("no variance".into(), |r| format!("{r:+.3}"));
            println!("{:<18} {:<16} {mode:?}: rho {rho} (n={})", c.cell, c.player, c.n);
        }
    }
    Ok(())
}
