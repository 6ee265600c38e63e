//! Deterministic scripted players, used as oracles and for offline runs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{render_decision, Agent, AgentError, AgentProfile, ContributionDecision, Observation, Turn};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Strategy {
    /// Always contributes `amount`.
    AlwaysContribute { amount: u32 },
    /// Always contributes 0.
    Defector,
    /// Full endowment in round 1, then the others' inferred mean from the last round,
    /// `(T - own) / (N - 1)` rounded half-up.
    Matcher,
    /// Contributes `base` every round except the last, where it contributes 0.
    EndgameDefector { base: u32 },
    /// Uniform over `0..=E`, seeded.
    RandomUniform,
}

impl Strategy {
    pub fn id(&self) -> String {
        match self {
            Strategy::AlwaysContribute { amount } => format!("always_contribute({amount})"),
            Strategy::Defector => "defector".into(),
            Strategy::Matcher => "matcher".into(),
            Strategy::EndgameDefector { base } => format!("endgame_defector({base})"),
            Strategy::RandomUniform => "random_uniform".into(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Short forms: `always:10`, `defector`, `matcher`, `endgame:8`, `random`.
impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |what: &str| -> Result<u32, String> {
            arg.ok_or_else(|| format!("{what} needs an amount, e.g. {what}:10"))?
                .parse()
                .map_err(|_| format!("bad amount in {s:?}"))
        };
        match name {
            "always" | "always_contribute" => Ok(Strategy::AlwaysContribute {
                amount: number("always")?,
            }),
            "defector" | "defect" => Ok(Strategy::Defector),
            "matcher" | "match" => Ok(Strategy::Matcher),
            "endgame" | "endgame_defector" => Ok(Strategy::EndgameDefector {
                base: number("endgame")?,
            }),
            "random" | "random_uniform" => Ok(Strategy::RandomUniform),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

pub struct ScriptedAgent {
    strategy: Strategy,
    profile: AgentProfile,
    rng: ChaCha8Rng,
}

impl ScriptedAgent {
    pub fn new(strategy: Strategy, profile: AgentProfile, seed: u64) -> Self {
        ScriptedAgent {
            strategy,
            profile,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    fn contribution(&mut self, obs: &Observation) -> u32 {
        match self.strategy {
            Strategy::AlwaysContribute { amount } => amount,
            Strategy::Defector => 0,
            Strategy::Matcher => match obs.history.last() {
                None => obs.endowment,
                Some(last) => {
                    let others = (last.total - last.own_contribution) as u64;
                    let seats = (obs.num_players - 1) as u64;
                    let mean_half_up = (2 * others + seats) / (2 * seats);
                    (mean_half_up as u32).min(obs.endowment)
                }
            },
            Strategy::EndgameDefector { base } => {
                if obs.round_index >= obs.num_rounds {
                    0
                } else {
                    base
                }
            }
            Strategy::RandomUniform => self.rng.random_range(0..=obs.endowment),
        }
    }
}

impl Agent for ScriptedAgent {
    fn profile(&self) -> &AgentProfile {
        &self.profile
    }

    fn decide(&mut self, obs: &Observation) -> Result<Turn, AgentError> {
        let contribution = self.contribution(obs);
        if contribution > obs.endowment {
            return Err(AgentError::InvalidScriptedDecision {
                contribution,
                endowment: obs.endowment,
            });
        }
        let decision = ContributionDecision {
            contribution,
            reasoning: obs
                .expects_reasoning
                .then(|| format!("Scripted {} strategy contributes {contribution}.", self.strategy)),
        };
        let response = render_decision(&decision);
        Ok(Turn {
            decision,
            exchanges: vec![(obs.message.clone(), response)],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::HistoryEntry;
    use crate::points::Points;
    use super::Strategy;
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    fn profile() -> AgentProfile {
        AgentProfile {
            id: "p1".into(),
            display_name: "bot".into(),
            opponent_label: "one other AI agent".into(),
            system_prompt: None,
        }
    }

    fn observation(round: u32, players: usize, history: Vec<HistoryEntry>) -> Observation {
        Observation {
            round_index: round,
            num_rounds: 20,
            num_players: players,
            player_index: 0,
            endowment: 10,
            history,
            rules_reminder: None,
            opponent_label: "x".into(),
            message: String::new(),
            expects_reasoning: false,
        }
    }

    fn entry(total: u32, own: u32) -> HistoryEntry {
        HistoryEntry {
            round_index: 1,
            total,
            own_contribution: own,
            own_gain: Points::ZERO,
            own_cumulative: Points::ZERO,
        }
    }

    fn decide(strategy: Strategy, obs: &Observation) -> u32 {
        ScriptedAgent::new(strategy, profile(), 7)
            .decide(obs)
            .unwrap()
            .decision
            .contribution
    }

    #[test]
    fn defector_and_matcher() {
        assert_eq!(decide(Strategy::Defector, &observation(5, 2, vec![entry(20, 10)])), 0);
        assert_eq!(decide(Strategy::Matcher, &observation(1, 2, vec![])), 10);
        // T = 10 with own 10 means the opponent gave 0.
        assert_eq!(decide(Strategy::Matcher, &observation(2, 2, vec![entry(10, 10)])), 0);
        // Four players: others gave 7 in total over 3 seats, 2.33 rounds to 2; 8 over 3 is 2.67 -> 3.
        assert_eq!(decide(Strategy::Matcher, &observation(2, 4, vec![entry(12, 5)])), 2);
        assert_eq!(decide(Strategy::Matcher, &observation(2, 4, vec![entry(13, 5)])), 3);
        // 1.5 rounds half-up to 2
        assert_eq!(decide(Strategy::Matcher, &observation(2, 3, vec![entry(3, 0)])), 2);
    }

    #[test]
    fn endgame_defector_drops_in_last_round() {
        let s = Strategy::EndgameDefector { base: 8 };
        assert_eq!(decide(s.clone(), &observation(19, 2, vec![])), 8);
        assert_eq!(decide(s, &observation(20, 2, vec![])), 0);
    }

    #[test]
    fn oversized_constant_is_rejected() {
        let mut agent = ScriptedAgent::new(Strategy::AlwaysContribute { amount: 11 }, profile(), 0);
        assert!(matches!(
            agent.decide(&observation(1, 2, vec![])),
            Err(AgentError::InvalidScriptedDecision { .. })
        ));
    }

    #[test]
    fn strategy_short_forms() {
        assert_eq!("always:10".parse(), Ok(Strategy::AlwaysContribute { amount: 10 }));
        assert_eq!("endgame:8".parse(), Ok(Strategy::EndgameDefector { base: 8 }));
        assert_eq!("random".parse(), Ok(Strategy::RandomUniform));
        assert!("always".parse::<Strategy>().is_err());
        assert!("tit_for_tat".parse::<Strategy>().is_err());
    }

    #[test]
    fn reasoning_follows_protocol() {
        let mut obs = observation(1, 2, vec![]);
        obs.expects_reasoning = true;
        let mut agent = ScriptedAgent::new(Strategy::Defector, profile(), 0);
        let turn = agent.decide(&obs).unwrap();
        assert!(turn.decision.reasoning.is_some());
        assert_eq!(
            crate::agents::parse_decision(&turn.exchanges[0].1, true, 10).unwrap(),
            turn.decision
        );
    }

    fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
        prop_oneof![
            (0u32..=10).prop_map(|amount| Strategy::AlwaysContribute { amount }),
            Just(Strategy::Defector),
            Just(Strategy::Matcher),
            (0u32..=10).prop_map(|base| Strategy::EndgameDefector { base }),
            Just(Strategy::RandomUniform),
        ]
    }

    proptest! {
        #[test]
        fn scripted_contributions_stay_in_range(
            s in strategy(),
            players in prop_oneof![Just(2usize), Just(4usize)],
            endowment in 0u32..=12,
            owns in proptest::collection::vec((0u32..=12, 0u32..=36), 0..20),
            seed in any::<u64>(),
        ) {
            let clamp_amount = match s {
                Strategy::AlwaysContribute { amount } => amount.min(endowment),
                _ => 0,
            };
            let s = match s {
                Strategy::AlwaysContribute { .. } => Strategy::AlwaysContribute { amount: clamp_amount },
                Strategy::EndgameDefector { base } => Strategy::EndgameDefector { base: base.min(endowment) },
                other => other,
            };
            let history: Vec<HistoryEntry> = owns
                .iter()
                .enumerate()
                .map(|(i, &(own, others))| {
                    let own = own.min(endowment);
                    let others = others.min(endowment * (players as u32 - 1));
                    HistoryEntry {
                        round_index: i as u32 + 1,
                        total: own + others,
                        own_contribution: own,
                        own_gain: Points::ZERO,
                        own_cumulative: Points::ZERO,
                    }
                })
                .collect();
            let mut obs = observation(history.len() as u32 + 1, players, history);
            obs.endowment = endowment;
            let mut agent = ScriptedAgent::new(s, profile(), seed);
            let c = agent.decide(&obs).unwrap().decision.contribution;
            prop_assert!(c <= endowment);
        }
    }
}
