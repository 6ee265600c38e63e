//! Four copies of one model under each persona, plus per-round curves with 95% bands.
//!
//! cargo run --example study3_self_copies

use std::sync::Arc;

use pgg_core::agents::AgentSpec;
use pgg_core::analysis::export::to_csv_string;
use pgg_core::analysis::{curve_rows, per_round_stats, CiMethod};
use pgg_core::game::StudyStyle;
use pgg_core::gateway::{Gateway, MockTransport, TransportPolicy};
use pgg_core::report::svg::render_curves;
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec: AgentSpec = "llm:openai/gpt-4o@GPT-4o".parse()?;
    let gateway = Arc::new(Gateway::new(Arc::new(MockTransport::simulated()), TransportPolicy::default())?);
    let harness = Harness::with_gateway(gateway);
    let mut summaries = Vec::new();
    for (i, cell) in enumerate_conditions(StudyStyle::Study3, &[spec], Some(10))?.iter().enumerate() {
        let batch = harness.run_batch(cell, i as u64, 4)?;
        let first = &batch.transcripts[0];
        println!(
            "{:<22} seats {:?}; first round {:?}",
            cell.label(),
            first.agent_ids,
            first.rounds[0].contributions
        );
        for seat in 0..4 {
            summaries.push(per_round_stats(&batch.transcripts, seat, CiMethod::Normal)?);
        }
    }
    let rows = curve_rows(&summaries);
    let out = std::env::temp_dir().join("pgg-study3");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("curves.csv"), to_csv_string(&rows)?)?;
    std::fs::write(out.join("curves.svg"), render_curves(&rows))?;
    println!("{} curve rows written to {}", rows.len(), out.display());
    Ok(())
}
