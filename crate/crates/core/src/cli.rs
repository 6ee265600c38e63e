//! The `pgg` command line.
//!
//! Exit codes: 0 success, 1 validation violations, 2 configuration error, 3 gateway
//! failure (including games aborted by the gateway), 4 I/O or data error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::agents::{AgentKind, AgentSpec, PromptStore, Strictness, TemplateVariant};
use crate::analysis::{
    correlation_grid, curve_rows, delta_table, export, per_round_stats, CiMethod, CorrelationRow,
    CurveRow, DeltaRow, Judge, SentimentRecord, SpearmanMode, DEFAULT_ALPHA,
};
use crate::game::{Condition, StudyStyle};
use crate::gateway::{
    Fixture, Gateway, GatewayStats, HttpTransport, MockTransport, ProviderConfig, RecordReplay,
    ReplayMode, Transport,
};
use crate::points::Multiplier;
use crate::report::manifest::{GatewayMode, GatewaySettings, RunManifest};
use crate::report::{svg, validate_batch};
use crate::runner::{
    derive_game_seed, enumerate_conditions, load_transcripts, persist_transcripts, BatchResult,
    ConditionCell, Harness, TranscriptError,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const VIOLATIONS: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const GATEWAY: u8 = 3;
    pub const IO: u8 = 4;

    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn config(message: impl ToString) -> Self {
        Self::new(Self::CONFIG, message.to_string())
    }

    fn io(message: impl ToString) -> Self {
        Self::new(Self::IO, message.to_string())
    }

    fn gateway(message: impl ToString) -> Self {
        Self::new(Self::GATEWAY, message.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "pgg", version, about = "Repeated public goods games between scripted and LLM agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Play every selected cell of a study and write one transcript file per cell.
    Run(RunArgs),
    /// Aggregate transcript files into CSV tables and SVG figures.
    Report(ReportArgs),
    /// Re-check transcript files against the game rules.
    Validate(ValidateArgs),
    /// Record or inspect replay fixtures.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Args, Debug, Clone, Default)]
pub struct GatewayArgs {
    /// Where model replies come from.
    #[arg(long, value_enum)]
    pub gateway: Option<GatewayMode>,
    /// Replay source (replay mode) or record target (live and mock modes).
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Corrected,
    AsPrinted,
}

impl From<VariantArg> for TemplateVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Corrected => TemplateVariant::Corrected,
            VariantArg::AsPrinted => TemplateVariant::AsPrinted,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// TOML run manifest; flags override its fields.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub study: Option<StudyStyle>,
    /// `scripted:<strategy>[@Name]` or `llm:<provider>/<model>[@Name]`, once per seat
    /// (once in total for study3).
    #[arg(long = "agent")]
    pub agents: Vec<AgentSpec>,
    /// Only this condition.
    #[arg(long)]
    pub condition: Option<Condition>,
    /// Only these persona orderings, e.g. `CS`.
    #[arg(long)]
    pub pairing: Vec<String>,
    #[arg(long)]
    pub games: Option<u32>,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub endowment: Option<u32>,
    #[arg(long)]
    pub multiplier: Option<Multiplier>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gateway: GatewayArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportMode {
    Curves,
    Deltas,
    Sentiment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CiArg {
    Normal,
    Bootstrap,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    pub mode: ReportMode,
    /// Directory of transcript files.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output directory; defaults to the input directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "normal")]
    pub ci: CiArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Judge model for sentiment mode, `provider/model`.
    #[arg(long, default_value = "openai/gpt-4o")]
    pub judge: String,
    #[arg(long, default_value = "raw")]
    pub spearman: SpearmanMode,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub gateway: GatewayArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum FixturesCommand {
    /// Play one game of one cell and record every model call.
    Record(RecordArgs),
    /// Summarize a fixture file.
    Inspect { file: PathBuf },
}

#[derive(Args, Debug, Clone)]
pub struct RecordArgs {
    #[arg(long)]
    pub study: StudyStyle,
    #[arg(long = "agent", required = true)]
    pub agents: Vec<AgentSpec>,
    #[arg(long, default_value = "name")]
    pub condition: Condition,
    /// Persona ordering; defaults to the first one of the study.
    #[arg(long)]
    pub pairing: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// `live` or `mock`.
    #[arg(long, value_enum, default_value = "mock")]
    pub gateway: GatewayMode,
    #[arg(long)]
    pub fixture: PathBuf,
    /// Directory for the transcript of the recorded game.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run(args).map(|_| ()),
        Command::Report(args) => report(args),
        Command::Validate(args) => validate(args),
        Command::Fixtures(FixturesCommand::Record(args)) => record(args),
        Command::Fixtures(FixturesCommand::Inspect { file }) => inspect(&file),
    }
}

/// Manifest from `--manifest` (if any) with flags layered on top.
pub fn resolve_manifest(args: &RunArgs) -> Result<RunManifest, CliError> {
    let mut m = match &args.manifest {
        Some(path) => RunManifest::load(path).map_err(CliError::config)?,
        None => {
            let study = args
                .study
                .ok_or_else(|| CliError::config("--study is required without --manifest"))?;
            let out = args
                .out
                .clone()
                .ok_or_else(|| CliError::config("--out is required without --manifest"))?;
            RunManifest::new(study, Vec::new(), out)
        }
    };
    if let Some(s) = args.study {
        m.study = s;
    }
    if !args.agents.is_empty() {
        m.agents = args.agents.clone();
    }
    if let Some(c) = args.condition {
        m.conditions = vec![c];
    }
    if !args.pairing.is_empty() {
        m.pairings = args.pairing.clone();
    }
    if args.games.is_some() {
        m.games = args.games;
    }
    if let Some(r) = args.rounds {
        m.rounds = r;
    }
    if let Some(e) = args.endowment {
        m.endowment = e;
    }
    if let Some(x) = args.multiplier {
        m.multiplier = x;
    }
    if let Some(s) = args.seed {
        m.seed = s;
    }
    if let Some(p) = args.parallelism {
        m.parallelism = p;
    }
    if let Some(o) = &args.out {
        m.out = o.clone();
    }
    apply_gateway_args(&mut m.gateway, &args.gateway);
    m.validate().map_err(CliError::config)?;
    Ok(m)
}

fn apply_gateway_args(settings: &mut GatewaySettings, args: &GatewayArgs) {
    if let Some(mode) = args.gateway {
        settings.mode = mode;
    }
    if let Some(f) = &args.fixture {
        settings.fixture = Some(f.clone());
    }
    if let Some(v) = args.variant {
        settings.variant = v.into();
    }
    if args.strict {
        settings.strictness = Strictness::Strict;
    }
}

/// Selected cells with their master seeds. Seeds come from the position in the full
/// matrix, so filtering never changes the seed of a cell.
pub fn plan_cells(m: &RunManifest) -> Result<Vec<(ConditionCell, u64)>, CliError> {
    let cells = enumerate_conditions(m.study, &m.agents, m.games).map_err(CliError::config)?;
    let selected: Vec<(ConditionCell, u64)> = cells
        .into_iter()
        .enumerate()
        .filter(|(_, c)| m.conditions.is_empty() || m.conditions.contains(&c.condition))
        .filter(|(_, c)| m.pairings.is_empty() || m.pairings.iter().any(|p| p.eq_ignore_ascii_case(&c.pairing())))
        .map(|(i, mut c)| {
            c.rounds = m.rounds;
            c.endowment = m.endowment;
            c.multiplier = m.multiplier;
            (c, derive_game_seed(m.seed, i as u64))
        })
        .collect();
    if selected.is_empty() {
        return Err(CliError::config("the condition and pairing filters select no cells"));
    }
    Ok(selected)
}

fn providers(settings: &GatewaySettings) -> Vec<ProviderConfig> {
    if settings.providers.is_empty() {
        ProviderConfig::defaults()
    } else {
        settings.providers.clone()
    }
}

/// Fails before any call is made if a provider is unknown or its key is missing.
fn check_credentials<'a>(
    settings: &GatewaySettings,
    used: impl IntoIterator<Item = &'a str>,
) -> Result<(), CliError> {
    if settings.mode != GatewayMode::Live {
        return Ok(());
    }
    let table = providers(settings);
    for name in used {
        let p = table
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| CliError::config(format!("unknown provider {name:?}")))?;
        p.api_key().map_err(CliError::gateway)?;
    }
    Ok(())
}

/// Gateway for the settings. Live and mock calls are recorded when a fixture path is set.
pub fn build_gateway(settings: &GatewaySettings) -> Result<Arc<Gateway>, CliError> {
    let transport: Arc<dyn Transport> = match settings.mode {
        GatewayMode::Replay => {
            let path = settings
                .fixture
                .as_ref()
                .ok_or_else(|| CliError::config("replay mode needs --fixture"))?;
            Arc::new(RecordReplay::replay_offline(path).map_err(CliError::io)?)
        }
        mode => {
            let inner: Arc<dyn Transport> = if mode == GatewayMode::Live {
                Arc::new(HttpTransport::new(providers(settings), settings.policy.timeout()))
            } else {
                Arc::new(MockTransport::simulated())
            };
            match &settings.fixture {
                Some(path) => Arc::new(
                    RecordReplay::open(path, ReplayMode::Record, inner).map_err(CliError::io)?,
                ),
                None => inner,
            }
        }
    };
    Gateway::new(transport, settings.policy.clone())
        .map(Arc::new)
        .map_err(CliError::config)
}

#[derive(Debug, Serialize)]
pub struct CellSummary {
    pub label: String,
    pub master_seed: u64,
    pub file: String,
    pub games: usize,
    pub valid: usize,
    pub invalid: usize,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub study: StudyStyle,
    pub seed: u64,
    pub parallelism: usize,
    pub gateway_mode: GatewayMode,
    pub cells: Vec<CellSummary>,
    pub gateway: GatewayStats,
    pub elapsed_ms: u128,
}

pub const RUN_SUMMARY: &str = "run_summary.json";

/// Plays the manifest and writes transcripts plus `run_summary.json` into `m.out`.
pub fn run_manifest(m: &RunManifest) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let cells = plan_cells(m)?;
    check_credentials(
        &m.gateway,
        m.agents.iter().filter_map(|a| match &a.kind {
            AgentKind::Llm { provider, .. } => Some(provider.as_str()),
            AgentKind::Scripted { .. } => None,
        }),
    )?;
    let gateway = build_gateway(&m.gateway)?;
    let harness = Harness {
        gateway: Some(gateway.clone()),
        prompts: PromptStore::new(m.gateway.variant),
        strictness: m.gateway.strictness,
        ..Harness::default()
    };
    std::fs::create_dir_all(&m.out).map_err(|e| CliError::io(format!("{}: {e}", m.out.display())))?;

    let mut summaries = Vec::with_capacity(cells.len());
    for (cell, master_seed) in &cells {
        let batch = harness
            .run_batch(cell, *master_seed, m.parallelism)
            .map_err(CliError::config)?;
        let file = m.out.join(format!("{}.jsonl", cell.label()));
        persist_transcripts(&batch, &file).map_err(CliError::io)?;
        summaries.push(CellSummary {
            label: cell.label(),
            master_seed: *master_seed,
            file: file.display().to_string(),
            games: batch.transcripts.len(),
            valid: batch.valid_count(),
            invalid: batch.invalid_count,
        });
    }
    let summary = RunSummary {
        study: m.study,
        seed: m.seed,
        parallelism: m.parallelism,
        gateway_mode: m.gateway.mode,
        cells: summaries,
        gateway: gateway.stats(),
        elapsed_ms: started.elapsed().as_millis(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(m.out.join(RUN_SUMMARY), json + "\n").map_err(CliError::io)?;
    Ok(summary)
}

fn run(args: RunArgs) -> Result<RunSummary, CliError> {
    let m = resolve_manifest(&args)?;
    let summary = run_manifest(&m)?;
    let invalid: usize = summary.cells.iter().map(|c| c.invalid).sum();
    for c in &summary.cells {
        println!("{}: {} valid, {} invalid -> {}", c.label, c.valid, c.invalid, c.file);
    }
    if invalid > 0 {
        return Err(CliError::gateway(format!(
            "{invalid} games aborted; they are kept in the transcripts with their reasons"
        )));
    }
    Ok(summary)
}

fn is_fixture_file(path: &Path) -> bool {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().next().map(|l| l.contains("\"format\":\"pgg-fixture\"")))
        .unwrap_or(false)
}

/// Every transcript file in `dir`, sorted by file name. Fixture files are skipped.
pub fn load_batches(dir: &Path) -> Result<Vec<BatchResult>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .filter(|p| !is_fixture_file(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::io(format!("no transcript files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| load_transcripts(p).map_err(CliError::io))
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Writes `<stem>.csv`, then renders `<stem>.svg` from the rows parsed back out of that CSV.
fn write_table<T, F>(out: &Path, stem: &str, rows: &[T], render: F) -> Result<(), CliError>
where
    T: Serialize + serde::de::DeserializeOwned,
    F: Fn(&[T]) -> String,
{
    let csv = export::to_csv_string(rows).map_err(CliError::io)?;
    write_text(&out.join(format!("{stem}.csv")), &csv)?;
    let parsed: Vec<T> = export::from_csv_str(&csv).map_err(CliError::io)?;
    write_text(&out.join(format!("{stem}.svg")), &render(&parsed))
}

pub fn curves_for(batches: &[BatchResult], method: CiMethod) -> Result<Vec<CurveRow>, CliError> {
    let mut summaries = Vec::new();
    for b in batches {
        for seat in 0..b.cell.agents.len() {
            summaries.push(
                per_round_stats(&b.transcripts, seat, method)
                    .map_err(|e| CliError::io(format!("{}: {e}", b.cell.label())))?,
            );
        }
    }
    Ok(curve_rows(&summaries))
}

/// Delta rows for every shape that has both a Name and a NoName batch.
pub fn deltas_for(batches: &[BatchResult], alpha: f64) -> Result<Vec<DeltaRow>, CliError> {
    let mut by_shape: BTreeMap<String, (Option<&BatchResult>, Option<&BatchResult>)> = BTreeMap::new();
    for b in batches {
        let e = by_shape.entry(b.cell.shape_key()).or_default();
        match b.cell.condition {
            Condition::Name => e.0 = Some(b),
            Condition::NoName => e.1 = Some(b),
        }
    }
    let mut rows = Vec::new();
    for (shape, pair) in by_shape {
        match pair {
            (Some(name), Some(noname)) => rows.extend(
                delta_table(name, noname, alpha).map_err(|e| CliError::io(format!("{shape}: {e}")))?,
            ),
            _ => eprintln!("warning: {shape} lacks one condition; skipped"),
        }
    }
    Ok(rows)
}

fn report(args: ReportArgs) -> Result<(), CliError> {
    let out = args.out.clone().unwrap_or_else(|| args.input.clone());
    std::fs::create_dir_all(&out).map_err(CliError::io)?;
    let batches = load_batches(&args.input)?;
    match args.mode {
        ReportMode::Curves => {
            let method = match args.ci {
                CiArg::Normal => CiMethod::Normal,
                CiArg::Bootstrap => CiMethod::Bootstrap {
                    resamples: 2000,
                    seed: args.seed,
                },
            };
            let rows = curves_for(&batches, method)?;
            write_table(&out, "curves", &rows, svg::render_curves)?;
        }
        ReportMode::Deltas => {
            let rows = deltas_for(&batches, args.alpha)?;
            write_table(&out, "deltas", &rows, svg::render_delta_grid)?;
        }
        ReportMode::Sentiment => {
            let (provider, model) = args
                .judge
                .split_once('/')
                .ok_or_else(|| CliError::config("--judge must be provider/model"))?;
            let mut settings = GatewaySettings::default();
            apply_gateway_args(&mut settings, &args.gateway);
            check_credentials(&settings, [provider])?;
            let judge = Judge::new(build_gateway(&settings)?, provider, model);
            let mut scored: Vec<(&BatchResult, Vec<SentimentRecord>)> = Vec::new();
            for b in &batches {
                let records = judge.score_batch(b, args.parallelism).map_err(CliError::gateway)?;
                if !records.is_empty() {
                    scored.push((b, records));
                }
            }
            let all: Vec<SentimentRecord> = scored.iter().flat_map(|(_, r)| r.clone()).collect();
            write_text(
                &out.join("sentiment.csv"),
                &export::to_csv_string(&all).map_err(CliError::io)?,
            )?;
            let pairs: Vec<(&BatchResult, &[SentimentRecord])> =
                scored.iter().map(|(b, r)| (*b, r.as_slice())).collect();
            let grid = correlation_grid(&pairs, args.spearman).map_err(CliError::io)?;
            let rows: Vec<CorrelationRow> = grid.iter().map(CorrelationRow::from).collect();
            write_table(&out, "correlations", &rows, svg::render_correlation_grid)?;
        }
    }
    println!("wrote {:?} report to {}", args.mode, out.display());
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let mut problems = 0usize;
    for path in &args.files {
        let file = path.display().to_string();
        match load_transcripts(path) {
            Ok(batch) => {
                let violations = validate_batch(&batch, &file);
                for v in &violations {
                    println!("{v}");
                }
                problems += violations.len();
                if violations.is_empty() {
                    println!("{file}: ok ({} games)", batch.transcripts.len());
                }
            }
            Err(e @ TranscriptError::Io { .. }) => return Err(CliError::io(e)),
            Err(e) => {
                println!("{file}: {e}");
                problems += 1;
            }
        }
    }
    if problems > 0 {
        return Err(CliError::new(CliError::VIOLATIONS, format!("{problems} violations")));
    }
    Ok(())
}

fn record(args: RecordArgs) -> Result<(), CliError> {
    if args.gateway == GatewayMode::Replay {
        return Err(CliError::config("fixtures are recorded from the live or mock gateway"));
    }
    let m = RunManifest {
        conditions: vec![args.condition],
        pairings: args.pairing.into_iter().collect(),
        games: Some(1),
        seed: args.seed,
        gateway: GatewaySettings {
            mode: args.gateway,
            fixture: Some(args.fixture.clone()),
            ..GatewaySettings::default()
        },
        rounds: args.rounds.unwrap_or(crate::game::DEFAULT_ROUNDS),
        ..RunManifest::new(args.study, args.agents, args.out)
    };
    m.validate().map_err(CliError::config)?;
    let mut m = m;
    let first = plan_cells(&m)?.remove(0).0.pairing();
    m.pairings = vec![first];
    let summary = run_manifest(&m)?;
    let cell = &summary.cells[0];
    println!("recorded {} -> {} and {}", cell.label, args.fixture.display(), cell.file);
    if cell.invalid > 0 {
        return Err(CliError::gateway("the recorded game was aborted"));
    }
    Ok(())
}

fn inspect(path: &Path) -> Result<(), CliError> {
    let fixture = Fixture::load(path).map_err(CliError::io)?;
    let mut models: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &fixture.entries {
        *models.entry(e.model.as_str()).or_default() += 1;
    }
    let unique: std::collections::BTreeSet<&str> =
        fixture.entries.iter().map(|e| e.hash.as_str()).collect();
    println!("session: {}", fixture.session);
    println!("entries: {}", fixture.entries.len());
    println!("distinct requests: {}", unique.len());
    for (model, n) in models {
        println!("  {model}: {n}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("pgg").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_build_a_manifest() {
        let Command::Run(args) = parse(&[
            "run", "--study", "study1", "--agent", "scripted:defector@D", "--agent",
            "llm:openai/gpt-4o@GPT-4o", "--condition", "name", "--pairing", "CS", "--games", "3",
            "--seed", "9", "--parallelism", "2", "--gateway", "mock", "--out", "x",
        ])
        .command
        else {
            panic!()
        };
        let m = resolve_manifest(&args).unwrap();
        assert_eq!(m.games, Some(3));
        assert_eq!(m.gateway.mode, GatewayMode::Mock);
        let cells = plan_cells(&m).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].0.label(), "study1-CS-name");
        // CS is ordering 2 of 9 (CC, CN, CS, ...), Name is the second condition.
        assert_eq!(cells[0].1, derive_game_seed(9, 5));
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let Command::Run(args) = parse(&["run", "--study", "study1", "--out", "x"]).command else {
            panic!()
        };
        assert_eq!(resolve_manifest(&args).unwrap_err().code, CliError::CONFIG);
        let Command::Run(args) = parse(&[
            "run", "--study", "study1", "--out", "x", "--agent", "scripted:defector", "--agent",
            "scripted:defector", "--gateway", "replay",
        ])
        .command
        else {
            panic!()
        };
        assert_eq!(resolve_manifest(&args).unwrap_err().code, CliError::CONFIG);
    }

    #[test]
    fn deltas_pair_conditions_by_shape() {
        let agents: Vec<AgentSpec> = vec!["scripted:random_uniform@R".parse().unwrap(); 2];
        let cells = enumerate_conditions(StudyStyle::Study1, &agents, Some(4)).unwrap();
        let h = Harness::offline();
        let batches: Vec<BatchResult> = cells[..4]
            .iter()
            .enumerate()
            .map(|(i, c)| h.run_batch(c, i as u64, 1).unwrap())
            .collect();
        let rows = deltas_for(&batches, 0.05).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].player, "R (1st)");
    }
}
