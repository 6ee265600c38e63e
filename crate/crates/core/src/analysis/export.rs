//! CSV tables. Column order is the field order of each row type.
//!
//! - curves: `cell, condition, player, round, mean, ci_half, n`
//! - deltas: the fields of [`DeltaRow`](super::DeltaRow)
//! - sentiment: the fields of [`SentimentRecord`](super::SentimentRecord)
//! - correlations: `cell, seat, player, mode, rho, no_variance, n` (`rho` empty when
//!   `no_variance` is true)

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::sentiment::{CorrelationCell, SpearmanMode};
use super::spearman::Correlation;
use super::stats::StatsSummary;
use crate::game::Condition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub cell: String,
    pub condition: Condition,
    pub player: String,
    pub round: u32,
    pub mean: f64,
    pub ci_half: f64,
    pub n: usize,
}

pub fn curve_rows(summaries: &[StatsSummary]) -> Vec<CurveRow> {
    summaries
        .iter()
        .flat_map(|s| {
            s.rounds.iter().map(move |r| CurveRow {
                cell: s.cell.clone(),
                condition: s.condition,
                player: s.player_id.clone(),
                round: r.round,
                mean: r.mean,
                ci_half: r.ci_half_width,
                n: r.n,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub cell: String,
    pub seat: usize,
    pub player: String,
    pub mode: SpearmanMode,
    pub rho: Option<f64>,
    pub no_variance: bool,
    pub n: usize,
}

impl From<&CorrelationCell> for CorrelationRow {
    fn from(c: &CorrelationCell) -> Self {
        CorrelationRow {
            cell: c.cell.clone(),
            seat: c.seat,
            player: c.player.clone(),
            mode: c.mode,
            rho: c.correlation.rho(),
            no_variance: c.correlation == Correlation::NoVariance,
            n: c.n,
        }
    }
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<(), csv::Error> {
    std::fs::write(path, to_csv_string(rows)?)?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

pub fn from_csv_str<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
