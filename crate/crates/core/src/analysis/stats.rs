//! Per-round confidence bands and Name minus NoName delta tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::StatsError;
use crate::game::{Condition, GameTranscript, StudyStyle};
use crate::runner::BatchResult;

pub const Z_95: f64 = 1.96;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CiMethod {
    /// `1.96 * s / sqrt(n)` with the sample standard deviation.
    #[default]
    Normal,
    /// Percentile bootstrap of the mean; half-width is half the 95% interval width.
    Bootstrap { resamples: u32, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStat {
    pub round: u32,
    pub mean: f64,
    pub ci_half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    /// Cell shape, e.g. `study1-CS`.
    pub cell: String,
    pub condition: Condition,
    pub player: usize,
    pub player_id: String,
    pub rounds: Vec<RoundStat>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean and 95% CI half-width of one sample.
pub fn summarize(xs: &[f64], method: CiMethod) -> Result<(f64, f64), StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = mean(xs);
    let half = match method {
        CiMethod::Normal => Z_95 * sample_variance(xs).sqrt() / (xs.len() as f64).sqrt(),
        CiMethod::Bootstrap { resamples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut means: Vec<f64> = (0..resamples.max(1))
                .map(|_| {
                    (0..xs.len())
                        .map(|_| xs[rng.random_range(0..xs.len())])
                        .sum::<f64>()
                        / xs.len() as f64
                })
                .collect();
            means.sort_by(f64::total_cmp);
            let at = |q: f64| means[((means.len() - 1) as f64 * q).round() as usize];
            (at(0.975) - at(0.025)) / 2.0
        }
    };
    Ok((m, half))
}

/// Per-round mean contribution of one seat across the valid games, with a 95% band.
pub fn per_round_stats(
    transcripts: &[GameTranscript],
    player: usize,
    method: CiMethod,
) -> Result<StatsSummary, StatsError> {
    let valid: Vec<&GameTranscript> = transcripts.iter().filter(|t| t.valid).collect();
    if valid.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: valid.len(),
        });
    }
    let first = valid[0];
    if player >= first.config.num_players {
        return Err(StatsError::PlayerOutOfRange {
            player,
            players: first.config.num_players,
        });
    }
    let rounds = first.config.num_rounds;
    if valid.iter().any(|t| t.rounds.len() != rounds as usize) {
        return Err(StatsError::ShapeMismatch(
            "games in one summary must have the same number of rounds".into(),
        ));
    }
    let mut out = Vec::with_capacity(rounds as usize);
    for r in 0..rounds as usize {
        let xs: Vec<f64> = valid.iter().map(|t| t.rounds[r].contributions[player] as f64).collect();
        let (m, half) = summarize(&xs, method)?;
        out.push(RoundStat {
            round: r as u32 + 1,
            mean: m,
            ci_half_width: half,
            n: xs.len(),
        });
    }
    Ok(StatsSummary {
        cell: cell_label(first),
        condition: first.config.condition,
        player,
        player_id: first.agent_ids[player].clone(),
        rounds: out,
    })
}

fn cell_label(t: &GameTranscript) -> String {
    format!(
        "study{}-{}",
        t.config.study_style.number(),
        crate::game::pairing_label(&t.config.personas)
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided Welch unequal-variance t-test. When both samples have zero variance the
/// statistic is undefined: equal means give `p = 1`, different means `p = 0`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, StatsError> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(StatsError::InsufficientData {
                needed: 2,
                got: xs.len(),
            });
        }
    }
    let (ma, mb) = (mean(a), mean(b));
    let (sa, sb) = (sample_variance(a) / a.len() as f64, sample_variance(b) / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Ok(if ma == mb {
            WelchTest {
                t: 0.0,
                df: f64::NAN,
                p_value: 1.0,
            }
        } else {
            WelchTest {
                t: (ma - mb).signum() * f64::INFINITY,
                df: f64::NAN,
                p_value: 0.0,
            }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| StatsError::Numeric(e.to_string()))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchTest { t, df, p_value })
}

/// One seat of one cell shape: Name mean minus NoName mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub study: StudyStyle,
    /// Display name, with a seat ordinal when several seats share it.
    pub player: String,
    pub seat: usize,
    pub pairing: String,
    /// `Study 1, GPT-4o, CC`.
    pub key: String,
    pub delta_mean: f64,
    pub name_mean: f64,
    pub noname_mean: f64,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant: bool,
    pub n_name: usize,
    pub n_noname: usize,
}

fn ordinal(i: usize) -> String {
    let suffix = match i {
        1 => "st",
        2 => "nd",
        3 => "rd",
        _ => "th",
    };
    format!("{i}{suffix}")
}

/// Per-seat labels; a seat whose name is shared gets its ordinal, e.g. `GPT-4o (2nd)`.
pub fn seat_labels(names: &[String]) -> Vec<String> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            if names.iter().filter(|n| *n == name).count() > 1 {
                format!("{name} ({})", ordinal(i + 1))
            } else {
                name.clone()
            }
        })
        .collect()
}

/// Per-game mean contribution of one seat, valid games only.
pub fn per_game_means(batch: &BatchResult, seat: usize) -> Vec<f64> {
    batch
        .valid()
        .filter_map(|t| t.mean_contribution(seat))
        .collect()
}

/// Compares two batches of the same shape seat by seat. The test unit is the per-game
/// mean contribution. Swapping the arguments negates every delta.
pub fn delta_table(
    name_batch: &BatchResult,
    noname_batch: &BatchResult,
    alpha: f64,
) -> Result<Vec<DeltaRow>, StatsError> {
    let (a, b) = (&name_batch.cell, &noname_batch.cell);
    let names_a: Vec<String> = a.agents.iter().map(|s| s.display_name().to_string()).collect();
    let names_b: Vec<String> = b.agents.iter().map(|s| s.display_name().to_string()).collect();
    if a.shape_key() != b.shape_key() || names_a != names_b || a.rounds != b.rounds {
        return Err(StatsError::ShapeMismatch(format!(
            "{} vs {}",
            a.label(),
            b.label()
        )));
    }
    let labels = seat_labels(&names_a);
    let pairing = a.pairing();
    let mut rows = Vec::with_capacity(labels.len());
    for (seat, player) in labels.into_iter().enumerate() {
        let xs = per_game_means(name_batch, seat);
        let ys = per_game_means(noname_batch, seat);
        let test = welch_t_test(&xs, &ys)?;
        let (name_mean, noname_mean) = (mean(&xs), mean(&ys));
        rows.push(DeltaRow {
            study: a.study,
            key: format!("{}, {player}, {pairing}", a.study),
            player,
            seat,
            pairing: pairing.clone(),
            delta_mean: name_mean - noname_mean,
            name_mean,
            noname_mean,
            t: test.t,
            df: test.df,
            p_value: test.p_value,
            significant: test.p_value < alpha,
            n_name: xs.len(),
            n_noname: ys.len(),
        });
    }
    Ok(rows)
}
