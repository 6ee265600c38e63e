//! Statistics over transcripts: per-round bands, delta tables, masking, sentiment and rank
//! correlation, plus CSV export.

pub mod export;
pub mod mask;
pub mod sentiment;
pub mod spearman;
pub mod stats;

use thiserror::Error;

pub use export::{curve_rows, read_csv, write_csv, CorrelationRow, CurveRow};
pub use mask::{mask_reasoning, Masker};
pub use sentiment::{
    correlation_grid, sentiment_spearman, CorrelationCell, Judge, SentimentError,
    SentimentRecord, SpearmanMode,
};
pub use spearman::{spearman, Correlation};
pub use stats::{
    delta_table, per_round_stats, summarize, welch_t_test, CiMethod, DeltaRow, RoundStat,
    StatsSummary, WelchTest, DEFAULT_ALPHA,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("inputs differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("batches differ in shape: {0}")]
    ShapeMismatch(String),
    #[error("player {player} out of range for {players} players")]
    PlayerOutOfRange { player: usize, players: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
}
