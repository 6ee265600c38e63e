//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p pgg-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use pgg_core::agents::prompts::noname_phrase;
use pgg_core::agents::{AgentSpec, Strategy, TemplateVariant};
use pgg_core::analysis::{
    delta_table, mask_reasoning, per_round_stats, spearman, CiMethod, Correlation, Masker,
};
use pgg_core::game::{best_response_oracle, round_payoff, Condition, GameConfig, Persona, StudyStyle};
use pgg_core::points::{Multiplier, Points};
use pgg_core::report::manifest::RunManifest;
use pgg_core::runner::{enumerate_conditions, BatchResult, Harness};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn payoff_exactness() -> Outcome {
    let m = Multiplier::default();
    let gains = round_payoff(&[8, 2], 10, m, 2).map_err(|e| e.to_string())?;
    ensure!(gains == vec![Points::whole(10), Points::whole(16)], "[8,2] gave {gains:?}");
    ensure!(gains[1] - gains[0] == Points::whole(6), "free-rider gap {}", gains[1] - gains[0]);

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for case in 0..10_000 {
        let n = if case % 2 == 0 { 2 } else { 4 };
        let cs: Vec<u32> = (0..n).map(|_| rng.random_range(0..=10)).collect();
        let total: i64 = cs.iter().map(|&c| c as i64).sum();
        let gains = round_payoff(&cs, 10, m, n).map_err(|e| e.to_string())?;
        // tenths: N*E*10 + (16 - 10) * T
        let expected = n as i64 * 100 + 6 * total;
        let sum: i64 = gains.iter().map(|g| g.tenths()).sum();
        ensure!(sum == expected, "{cs:?}: gains sum {sum} tenths, expected {expected}");
        for (c, g) in cs.iter().zip(&gains) {
            let own = (10 - *c as i64) * 10 + 16 * total / n as i64;
            ensure!(g.tenths() == own, "{cs:?}: gain {g} for contribution {c}");
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("worked example exact; 10000 random cases in {:?}", start.elapsed()))
}

fn nash_dominance() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for (study, n, max_others) in [(StudyStyle::Study1, 2, 10u32), (StudyStyle::Study3, 4, 30)] {
        let config = GameConfig::new(study, vec![Persona::Neutral; n], Condition::NoName);
        let marginal = config.marginal_return_per_point();
        ensure!(marginal < Points::ZERO, "{study}: marginal {marginal} not negative");
        ensure!(
            marginal.tenths() * n as i64 == 16 - 10 * n as i64,
            "{study}: marginal {marginal} is not m/N - 1"
        );
        for others in 0..=max_others {
            let br = best_response_oracle(others, &config).map_err(|e| e.to_string())?;
            ensure!(br == 0, "{study}: best response {br} to others' total {others}");
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{checked} opponent profiles, best response always 0"))
}

fn matrix_fidelity() -> Outcome {
    let two = [
        AgentSpec::scripted(Strategy::Defector, "Alpha Model"),
        AgentSpec::scripted(Strategy::Matcher, "Beta"),
    ];
    let one = [AgentSpec::scripted(Strategy::RandomUniform, "Gamma")];
    let harness = Harness::offline();
    let mut prompts = 0;
    for study in common::STUDIES {
        let specs: &[AgentSpec] = if study == StudyStyle::Study3 { &one } else { &two };
        let cells = enumerate_conditions(study, specs, Some(1)).map_err(|e| e.to_string())?;
        let expected = if study == StudyStyle::Study3 { 6 } else { 18 };
        ensure!(cells.len() == expected, "{study}: {} cells", cells.len());
        for cell in &cells {
            let t = harness.run_game(&cell.clone().with_rounds(1), 1).map_err(|e| e.to_string())?;
            for (seat, prompt) in t.system_prompts.iter().enumerate() {
                let prompt = prompt.as_deref().ok_or("missing system prompt")?;
                let needle = match cell.condition {
                    Condition::Name => t.display_names[seat].clone(),
                    Condition::NoName => noname_phrase(study).to_string(),
                };
                ensure!(prompt.contains(&needle), "{}: seat {seat} lacks {needle:?}", cell.label());
                prompts += 1;
            }
        }
    }
    for variant in [TemplateVariant::AsPrinted, TemplateVariant::Corrected] {
        let bad = common::golden_mismatches(variant);
        ensure!(bad.is_empty(), "golden mismatches: {bad:?}");
    }
    Ok(format!("18/18/6 cells, {prompts} prompts checked, 36 golden renders identical"))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, parallelism) in dirs.iter().zip([1, 8]) {
        let mut m = RunManifest::new(
            StudyStyle::Study1,
            vec![
                AgentSpec::scripted(Strategy::RandomUniform, "Rand"),
                AgentSpec::scripted(Strategy::Matcher, "Match"),
            ],
            dir.path(),
        );
        m.games = Some(5);
        m.seed = 2024;
        m.parallelism = parallelism;
        pgg_core::cli::run_manifest(&m).map_err(|e| e.message)?;
    }
    let mut files: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".jsonl"))
        .collect();
    files.sort();
    ensure!(files.len() == 18, "{} transcript files", files.len());
    for f in &files {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        ensure!(a == b, "{f:?} differs between parallelism 1 and 8");
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("18 files byte-identical at parallelism 1 and 8 in {:?}", start.elapsed()))
}

/// Average ranks by counting, then Pearson.
fn brute_force_rho(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn sequences(len: usize) -> Vec<Vec<f64>> {
    (0..3usize.pow(len as u32))
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let v = (code % 3) as f64 + 1.0;
                    code /= 3;
                    v
                })
                .collect()
        })
        .collect()
}

fn spearman_oracle() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0usize;
    let mut worst = 0.0f64;
    for len in 0..=6 {
        let seqs = sequences(len);
        for xs in &seqs {
            for ys in &seqs {
                pairs += 1;
                let got = spearman(xs, ys);
                if len < 2 {
                    ensure!(got.is_err(), "length {len} accepted");
                    continue;
                }
                let got = got.map_err(|e| e.to_string())?;
                match (got, brute_force_rho(xs, ys)) {
                    (Correlation::NoVariance, None) => {}
                    (Correlation::Rho { rho }, Some(want)) => {
                        worst = worst.max((rho - want).abs());
                        ensure!((rho - want).abs() <= 1e-12, "{xs:?} {ys:?}: {rho} vs {want}");
                    }
                    (got, want) => return Err(format!("{xs:?} {ys:?}: {got:?} vs {want:?}")),
                }
            }
        }
    }
    for n in 2..=12 {
        let up: Vec<f64> = (0..n).map(|i| (i * i) as f64).collect();
        let down: Vec<f64> = up.iter().map(|v| -v).collect();
        let ids: Vec<f64> = (0..n).map(|i| i as f64).collect();
        ensure!(spearman(&ids, &up).unwrap() == Correlation::Rho { rho: 1.0 }, "n={n} not +1");
        ensure!(spearman(&ids, &down).unwrap() == Correlation::Rho { rho: -1.0 }, "n={n} not -1");
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{pairs} pairs, max error {worst:.1e}, +/-1 exact, in {:?}", start.elapsed()))
}

fn constant_batch(amount: u32, condition: Condition, games: u32) -> Result<BatchResult, String> {
    let spec = AgentSpec::scripted(Strategy::AlwaysContribute { amount }, "Const");
    let cell = enumerate_conditions(StudyStyle::Study1, &[spec.clone(), spec], Some(games))
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|c| c.condition == condition && c.pairing() == "NN")
        .ok_or("no NN cell")?;
    Harness::offline().run_batch(&cell, 3, 4).map_err(|e| e.to_string())
}

fn statistics_pipeline() -> Outcome {
    let tens = constant_batch(10, Condition::Name, 50)?;
    let sixes = constant_batch(6, Condition::NoName, 50)?;
    let forward = delta_table(&tens, &sixes, 0.05).map_err(|e| e.to_string())?;
    let backward = delta_table(&sixes, &tens, 0.05).map_err(|e| e.to_string())?;
    for (f, b) in forward.iter().zip(&backward) {
        ensure!(f.delta_mean == 4.0 && b.delta_mean == -4.0, "deltas {} / {}", f.delta_mean, b.delta_mean);
        ensure!(f.significant && b.significant, "+/-4.0 not significant (p={})", f.p_value);
        ensure!(f.n_name == 50 && f.n_noname == 50, "sample sizes {} / {}", f.n_name, f.n_noname);
    }
    let same = delta_table(&tens, &tens, 0.05).map_err(|e| e.to_string())?;
    for row in &same {
        ensure!(row.delta_mean == 0.0 && !row.significant, "self comparison {row:?}");
    }

    let spec = AgentSpec::scripted(Strategy::RandomUniform, "Rand");
    let cell = enumerate_conditions(StudyStyle::Study1, &[spec.clone(), spec], None)
        .map_err(|e| e.to_string())?
        .remove(0);
    let (mut big, mut small) = (0.0, 0.0);
    let mut replicates = 0;
    for rep in 0..20u64 {
        let b100 = Harness::offline().run_batch(&cell.clone().with_games(100), 1000 + rep, 4).map_err(|e| e.to_string())?;
        let b25 = Harness::offline().run_batch(&cell.clone().with_games(25), 5000 + rep, 4).map_err(|e| e.to_string())?;
        let s100 = per_round_stats(&b100.transcripts, 0, CiMethod::Normal).map_err(|e| e.to_string())?;
        let s25 = per_round_stats(&b25.transcripts, 0, CiMethod::Normal).map_err(|e| e.to_string())?;
        for (a, b) in s100.rounds.iter().zip(&s25.rounds) {
            big += a.ci_half_width;
            small += b.ci_half_width;
            replicates += 1;
        }
    }
    let ratio = (big / replicates as f64) / (small / replicates as f64);
    ensure!((ratio / 0.5 - 1.0).abs() <= 0.05, "CI ratio n=100/n=25 is {ratio:.4}");
    Ok(format!("+4.0/-4.0 significant, self 0.0 not significant, CI ratio {ratio:.4} over {replicates} replicates"))
}

const NAMES: [&str; 4] = ["GPT-4o", "Claude Sonnet 4", "Llama 4 Maverick", "Qwen3"];

const CORPUS: &[&str] = &[
    "GPT-4o contributed 10 last round, so I will match GPT-4o.",
    "Since the other AI is Claude Sonnet 4, I expect it to cooperate.",
    "As an AI model I value fairness; Sonnet 4 seems to agree.",
    "Llama 4 Maverick defected twice. Llama 4 might defect again.",
    "Qwen3 and I both gain when the pool grows; Qwen3-235B-A22B is rational.",
    "Other AIs like gpt-4o or claude tend to reciprocate. Models learn.",
    "My model of the opponent: LLAMA 4 is selfish, QWEN3 is not.",
    "I am playing against another AI, which is GPT-4o. AI agents often cooperate.",
    "Trusting Claude Sonnet 4 worked: the model returned 8 points.",
    "Meta's Llama 4 Maverick model contributed 0; I keep 10 as the AI said.",
    "Playing with Sonnet, a model like me, I contribute 7.",
    "GPT-4o's contribution of 9 shows the AI values the group.",
];

fn forbidden(text: &str) -> Option<String> {
    let lower = text.to_lowercase();
    for name in NAMES.iter().chain(&["gpt", "claude", "sonnet", "llama", "qwen", "maverick"]) {
        if lower.contains(&name.to_lowercase()) {
            return Some(name.to_string());
        }
    }
    let token = Regex::new(r"(?i)\b(ai|ais|model|models)\b").unwrap();
    token.find(text).map(|m| m.as_str().to_string())
}

fn masking() -> Outcome {
    for text in CORPUS {
        let masked = mask_reasoning(text, &NAMES);
        if let Some(hit) = forbidden(&masked) {
            return Err(format!("{text:?} -> {masked:?} still contains {hit:?}"));
        }
    }
    let masker = Masker::new(&NAMES);
    let vocab = [
        "GPT-4o", "gpt", "Claude", "Sonnet 4", "Llama 4", "Maverick", "Qwen3", "AI", "ai", "AIs",
        "model", "Models", "the", "other", "player", "I", "will", "contribute", "5", "points", ",",
        ".", "  ", "\n", "trust", "pool", "AI-driven", "remodel", "said",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..1000 {
        let len = rng.random_range(0..40);
        let text: Vec<&str> = (0..len).map(|_| vocab[rng.random_range(0..vocab.len())]).collect();
        let text = text.join(if i % 2 == 0 { " " } else { "" });
        let once = masker.mask(&text);
        let twice = masker.mask(&once);
        ensure!(once == twice, "not idempotent on {text:?}");
    }
    Ok(format!("{} corpus texts clean, 1000 random texts idempotent", CORPUS.len()))
}

fn offline_replay() -> Outcome {
    let out = common::replay_recorded_game(&common::replay_session(), &common::replay_transcript());
    ensure!(out.invalid_games == 0, "{} games aborted on replay", out.invalid_games);
    ensure!(out.rendered == out.recorded, "replayed transcript is not bit-identical");
    ensure!(out.poisoned_touches == 0, "network transport touched {} times", out.poisoned_touches);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("replayed.jsonl");
    std::fs::write(&file, &out.rendered).unwrap();
    let v = common::pgg().arg("validate").arg(&file).output().map_err(|e| e.to_string())?;
    ensure!(
        v.status.success(),
        "validate failed: {}",
        String::from_utf8_lossy(&v.stdout)
    );
    Ok("20-round game replayed bit-identically, validate clean, 0 network touches".into())
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("payoff exactness", payoff_exactness),
        ("nash dominance", nash_dominance),
        ("condition-matrix fidelity", matrix_fidelity),
        ("determinism", determinism),
        ("spearman oracle equivalence", spearman_oracle),
        ("statistics pipeline", statistics_pipeline),
        ("masking", masking),
        ("offline llm path", offline_replay),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(p.as_ref()))));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
