//! Re-checking stored transcripts against the game rules.

use std::fmt;

use serde::Serialize;

use crate::game::{round_payoff, GameTranscript};
use crate::points::Points;
use crate::runner::BatchResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Wrong number of seats in a record.
    Shape,
    ContributionRange,
    /// Stored total differs from the sum of contributions.
    Total,
    /// Stored gains do not sum to `N*E + (m - 1)*T`.
    Conservation,
    /// Running totals differ from the running sum of rule-computed gains.
    Cumulative,
    /// A valid game with a round count other than the configured one, or misnumbered rounds.
    RoundCount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub file: String,
    pub game_index: usize,
    pub game_seed: u64,
    pub round: Option<u32>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: game {} (seed {})", self.file, self.game_index, self.game_seed)?;
        if let Some(r) = self.round {
            write!(f, " round {r}")?;
        }
        write!(f, ": {:?}: {}", self.kind, self.detail)
    }
}

/// `(round, kind, detail)` for every problem in one game.
pub fn check_transcript(t: &GameTranscript) -> Vec<(Option<u32>, ViolationKind, String)> {
    let cfg = &t.config;
    let n = cfg.num_players;
    let mut out = Vec::new();
    if t.valid && t.rounds.len() != cfg.num_rounds as usize {
        out.push((
            None,
            ViolationKind::RoundCount,
            format!("{} rounds recorded, {} configured", t.rounds.len(), cfg.num_rounds),
        ));
    }
    let mut running = vec![Points::ZERO; n];
    for (i, r) in t.rounds.iter().enumerate() {
        let round = Some(r.round_index);
        if r.round_index != i as u32 + 1 {
            out.push((round, ViolationKind::RoundCount, format!("expected round {}", i + 1)));
        }
        if r.contributions.len() != n || r.gains.len() != n || r.cumulative.len() != n {
            out.push((round, ViolationKind::Shape, format!("expected {n} seats")));
            continue;
        }
        for (seat, &c) in r.contributions.iter().enumerate() {
            if c > cfg.endowment {
                out.push((
                    round,
                    ViolationKind::ContributionRange,
                    format!("seat {seat} contributed {c}, endowment {}", cfg.endowment),
                ));
            }
        }
        let sum: u32 = r.contributions.iter().sum();
        if sum != r.total {
            out.push((round, ViolationKind::Total, format!("total {} but contributions sum to {sum}", r.total)));
        }
        let expected_sum = Points::whole((n as u32 * cfg.endowment) as i64)
            + Points::from_tenths((cfg.multiplier.tenths() as i64 - 10) * sum as i64);
        let gain_sum: Points = r.gains.iter().copied().sum();
        if gain_sum != expected_sum {
            out.push((
                round,
                ViolationKind::Conservation,
                format!("gains sum to {gain_sum}, expected {expected_sum}"),
            ));
        }
        let clamped: Vec<u32> = r.contributions.iter().map(|&c| c.min(cfg.endowment)).collect();
        if let Ok(rule) = round_payoff(&clamped, cfg.endowment, cfg.multiplier, n) {
            for (acc, g) in running.iter_mut().zip(rule) {
                *acc += g;
            }
        }
        if r.cumulative != running {
            out.push((
                round,
                ViolationKind::Cumulative,
                format!(
                    "cumulative {:?}, expected {:?}",
                    r.cumulative.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    running.iter().map(ToString::to_string).collect::<Vec<_>>()
                ),
            ));
        }
    }
    out
}

pub fn validate_batch(batch: &BatchResult, file: &str) -> Vec<Violation> {
    batch
        .transcripts
        .iter()
        .enumerate()
        .flat_map(|(game_index, t)| {
            check_transcript(t).into_iter().map(move |(round, kind, detail)| Violation {
                file: file.to_string(),
                game_index,
                game_seed: t.game_seed,
                round,
                kind,
                detail,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentSpec, Strategy};
    use crate::game::StudyStyle;
    use crate::runner::{enumerate_conditions, Harness};

    fn batch() -> BatchResult {
        let cell = enumerate_conditions(
            StudyStyle::Study3,
            &[AgentSpec::scripted(Strategy::RandomUniform, "R")],
            Some(3),
        )
        .unwrap()
        .remove(0);
        Harness::offline().run_batch(&cell, 5, 1).unwrap()
    }

    #[test]
    fn generated_batch_is_clean() {
        assert!(validate_batch(&batch(), "b").is_empty());
    }

    #[test]
    fn corrupted_gain_is_one_conservation_violation() {
        let mut b = batch();
        b.transcripts[1].rounds[6].gains[2] += Points::from_tenths(5);
        let v = validate_batch(&b, "b");
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind, ViolationKind::Conservation);
        assert_eq!((v[0].game_index, v[0].round), (1, Some(7)));
    }

    #[test]
    fn corrupted_cumulative_and_contribution() {
        let mut b = batch();
        b.transcripts[0].rounds[3].cumulative[0] = Points::ZERO;
        let v = validate_batch(&b, "b");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Cumulative);

        let mut b = batch();
        b.transcripts[0].rounds[0].contributions[0] = 11;
        let kinds: Vec<ViolationKind> = validate_batch(&b, "b").into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::ContributionRange));
        assert!(kinds.contains(&ViolationKind::Total));
    }
}
