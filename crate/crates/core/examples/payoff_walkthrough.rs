//! Round payoffs, the conservation identity and why contributing nothing is the
//! one-shot best response.
//!
//! cargo run --example payoff_walkthrough

use pgg_core::game::{best_response_oracle, round_payoff, Condition, GameConfig, GameState, Persona, StudyStyle};
use pgg_core::points::{Multiplier, Points};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Multiplier::default();
    println!("multiplier {m}, endowment 10");

    for contributions in [[8u32, 2], [10, 10], [0, 0], [10, 0]] {
        let gains = round_payoff(&contributions, 10, m, 2)?;
        let total: u32 = contributions.iter().sum();
        let sum: Points = gains.iter().copied().sum();
        println!(
            "contributions {contributions:?} -> gains [{}, {}], sum {sum} = 2*10 + 0.6*{total}",
            gains[0], gains[1]
        );
    }

    let config = GameConfig::new(StudyStyle::Study1, vec![Persona::Neutral; 2], Condition::NoName);
    println!("\none extra point changes your own gain by {}", config.marginal_return_per_point());
    for others in [0, 5, 10] {
        println!("best response when the other gives {others}: {}", best_response_oracle(others, &config)?);
    }

    let four = GameConfig::new(StudyStyle::Study3, vec![Persona::Neutral; 4], Condition::NoName);
    println!("with four players the marginal is {}", four.marginal_return_per_point());

    let mut state = GameState::new(config.with_rounds(3))?;
    for round in [[10, 10], [10, 0], [0, 0]] {
        let r = state.advance_round(&round)?;
        println!(
            "round {}: total {} gains [{}, {}] cumulative [{}, {}]",
            r.round_index, r.total, r.gains[0], r.gains[1], r.cumulative[0], r.cumulative[1]
        );
    }
    Ok(())
}
