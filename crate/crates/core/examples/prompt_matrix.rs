//! Enumerates the condition matrix of each study and prints the system prompts of one cell.
//!
//! cargo run --example prompt_matrix -- [study1|study2|study3]

use pgg_core::agents::{AgentSpec, PromptStore, TemplateVariant};
use pgg_core::game::StudyStyle;
use pgg_core::runner::enumerate_conditions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let study: StudyStyle = std::env::args().nth(1).as_deref().unwrap_or("study1").parse()?;
    let specs: Vec<AgentSpec> = match study {
        StudyStyle::Study3 => vec!["llm:openai/gpt-4o@GPT-4o".parse()?],
        _ => vec![
            "llm:openai/gpt-4o@GPT-4o".parse()?,
            "llm:anthropic/claude-sonnet-4-20250514@Claude Sonnet 4".parse()?,
        ],
    };
    let cells = enumerate_conditions(study, &specs, None)?;
    println!("{study}: {} cells", cells.len());
    for cell in &cells {
        println!("  {:<20} games={} seats={}", cell.label(), cell.games, cell.agents.len());
    }

    let cell = cells.iter().find(|c| c.label().ends_with("-name")).expect("a Name cell");
    let config = cell.config(0);
    for variant in [TemplateVariant::Corrected, TemplateVariant::AsPrinted] {
        let store = PromptStore::new(variant);
        println!("\n{} ({variant:?})", cell.label());
        for spec in &cell.agents {
            let prompt = store.build_system_prompt(&config, spec.persona, spec.display_name())?;
            println!("--- {} as {}:\n{prompt}", spec.display_name(), spec.persona.as_str());
        }
    }
    Ok(())
}
