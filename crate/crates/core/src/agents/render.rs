//! Per-round user-turn text: the summary of the last round and the request for the next.

use thiserror::Error;

use crate::game::{GameConfig, RoundRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("player index {player} out of range for a {players}-player round")]
pub struct RenderError {
    pub player: usize,
    pub players: usize,
}

/// Restated rules and opponent, prepended to every summary in the first study's protocol.
pub fn rules_reminder(config: &GameConfig, opponent_label: &str) -> String {
    format!(
        "Reminder: you are playing a game with {opponent_label}. Everyone started with 0 points, \
         and there are {rounds} rounds. Each round, you receive {e} points and can contribute \
         between 0 to {e} points towards a common pool; whatever you do not contribute is yours. \
         After each round, the summation of contributions is multiplied by {m} and divided \
         evenly between everyone.",
        rounds = config.num_rounds,
        e = config.endowment,
        m = config.multiplier,
    )
}

/// Pool total, the player's gain, and running total for one round. Only the first study
/// prepends the rules reminder.
pub fn render_round_summary(
    record: &RoundRecord,
    player_index: usize,
    config: &GameConfig,
    opponent_label: &str,
) -> Result<String, RenderError> {
    let players = record.contributions.len();
    if player_index >= players
        || player_index >= record.gains.len()
        || player_index >= record.cumulative.len()
    {
        return Err(RenderError {
            player: player_index,
            players,
        });
    }
    let summary = format!(
        "Round {r} summary: the total contribution to the common pool was {t} points. \
         You received {gain} points this round. You have received {cum} points in total \
         across all rounds.",
        r = record.round_index,
        t = record.total,
        gain = record.gains[player_index],
        cum = record.cumulative[player_index],
    );
    if config.study_style.reminds_each_round() {
        Ok(format!("{}\n{summary}", rules_reminder(config, opponent_label)))
    } else {
        Ok(summary)
    }
}

pub fn render_round_request(round_index: u32, config: &GameConfig) -> String {
    let e = config.endowment;
    if config.study_style.expects_reasoning() {
        format!(
            "Round {round_index} of {}. Respond with a JSON object with the keys 'reasoning' \
             (string) and 'contribution' (integer between 0 and {e}).",
            config.num_rounds
        )
    } else {
        format!(
            "Round {round_index} of {}. Respond with a JSON object with one key: \
             'contribution' (an integer from 0 to {e}).",
            config.num_rounds
        )
    }
}
