//! Round-robin between scripted strategies in two-player games, ranked by mean final score.
//!
//! cargo run --example scripted_tournament

use pgg_core::agents::{AgentSpec, Strategy};
use pgg_core::game::{Condition, StudyStyle};
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let entrants = [
        AgentSpec::scripted(Strategy::AlwaysContribute { amount: 10 }, "Cooperator"),
        AgentSpec::scripted(Strategy::Defector, "Defector"),
        AgentSpec::scripted(Strategy::Matcher, "Matcher"),
        AgentSpec::scripted(Strategy::EndgameDefector { base: 8 }, "Endgame"),
        AgentSpec::scripted(Strategy::RandomUniform, "Random"),
    ];
    let harness = Harness::offline();
    let mut totals = vec![(0.0f64, 0usize); entrants.len()];

    for (i, a) in entrants.iter().enumerate() {
        for (j, b) in entrants.iter().enumerate().filter(|(j, _)| *j > i) {
            let cell = enumerate_conditions(StudyStyle::Study2, &[a.clone(), b.clone()], Some(20))?
                .into_iter()
                .find(|c| c.condition == Condition::NoName && c.pairing() == "NN")
                .expect("neutral cell");
            let batch = harness.run_batch(&cell, (i * 10 + j) as u64, 4)?;
            let (mut sa, mut sb) = (0.0, 0.0);
            for t in batch.valid() {
                let scores = t.final_scores();
                sa += scores[0].as_f64();
                sb += scores[1].as_f64();
            }
            let n = batch.valid_count() as f64;
            println!("{:>10} vs {:<10} {:6.1} : {:6.1}", a.display_name(), b.display_name(), sa / n, sb / n);
            totals[i].0 += sa / n;
            totals[i].1 += 1;
            totals[j].0 += sb / n;
            totals[j].1 += 1;
        }
    }

    let mut ranking: Vec<(&str, f64)> = entrants
        .iter()
        .zip(&totals)
        .map(|(e, (sum, n))| (e.display_name(), sum / *n as f64))
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\nmean final score per match:");
    for (name, score) in ranking {
        println!("  {name:<10} {score:6.1}");
    }
    Ok(())
}
