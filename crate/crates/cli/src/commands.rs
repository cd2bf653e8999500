//! Command implementations. Each builds its outputs in memory and writes them at the end.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use interplay_core::augment::{
    cutout_ratio, game_from_rewards, mix_games, reward_shift_invariance_check, suppress_low_order, suppression_effect, RewardTable,
    SuppressionEffect,
};
use interplay_core::estimator::{estimate_interaction_keyed, raw_order_strength, sample_pairs, InputSet};
use interplay_core::exact::{decompose, interaction_exact, interaction_orders, DecompositionReport};
use interplay_core::rng::hash_str;
use interplay_core::scorer::protocol::{serve, ExternalScorer, ScorerEndpoint};
use interplay_core::scorer::{BuiltinScorer, MaskSpec, OutputKind};
use interplay_core::search::{correlate, grid_search, CorrelationReport, MetricTable, LOW_CONFIDENCE_MODELS};
use interplay_core::strength::{amris, profile_from_raw, AmrisParams, StrengthProfile};
use interplay_core::{Error, Game, TableGame};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::{csv_document, json_document, num, ConfigHasher, OutputSet, Provenance, Stamped};
use crate::schema::{parse_baseline, parse_metrics, read_json, GameContext, GameSetFile, ProfileFile, RewardTableFile};
use crate::{
    AmrisArgs, AmrisOverrides, Cli, Command, CorrelateArgs, EstimateArgs, ExactArgs, GameOverrides, GridsearchArgs,
    ProfileArgs, SampleOverrides, ServeArgs, VerifyArgs,
};

#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub success: bool,
}

/// Runs one command on a pool of `--workers` threads.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.workers {
        Some(0) => Err(Error::InvalidConfig("worker count must be at least 1".into()).into()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().context("building worker pool")?;
            pool.install(|| dispatch(&cli.command, cfg))
        }
        None => dispatch(&cli.command, cfg),
    }
}

fn dispatch(command: &Command, cfg: RunConfig) -> Result<Outcome> {
    let (out_dir, outputs, success) = match command {
        Command::Exact(a) => (&a.out.out, cmd_exact(a, cfg)?, true),
        Command::Estimate(a) => (&a.out.out, cmd_estimate(a, cfg)?, true),
        Command::Profile(a) => (&a.out.out, cmd_profile(a, cfg)?, true),
        Command::Amris(a) => (&a.out.out, cmd_amris(a, cfg)?, true),
        Command::Gridsearch(a) => (&a.out.out, cmd_gridsearch(a, cfg)?, true),
        Command::Correlate(a) => (&a.out.out, cmd_correlate(a, cfg)?, true),
        Command::Verify(a) => {
            let (outputs, ok) = cmd_verify(a, cfg)?;
            (&a.out.out, outputs, ok)
        }
        Command::ServeScorer(a) => {
            cmd_serve(a, cfg)?;
            return Ok(Outcome { files: Vec::new(), success: true });
        }
    };
    let files = outputs.write_all(out_dir)?;
    Ok(Outcome { files, success })
}

fn apply_game_overrides(cfg: &mut RunConfig, o: &GameOverrides) {
    if let Some(b) = &o.baseline {
        cfg.mask.baseline = Some(b.clone());
    }
    if let Some(cmd) = &o.scorer_cmd {
        let command = cmd.split_whitespace().map(String::from).collect();
        cfg.scorer = Some(match cfg.scorer.take() {
            Some(ep) => ScorerEndpoint { command, ..ep },
            None => ScorerEndpoint::new(command),
        });
    }
}

fn apply_sample_overrides(cfg: &mut RunConfig, o: &SampleOverrides) {
    if let Some(s) = o.seed {
        cfg.sample.seed = s;
    }
    if let Some(k) = o.samples {
        cfg.sample.subsets_per_order = k;
    }
    if let Some(k) = o.pairs {
        cfg.sample.pairs_per_input = k;
    }
    if let Some(g) = &o.grid {
        cfg.sample.order_grid = g.clone();
    }
}

fn apply_amris_overrides(cfg: &mut RunConfig, o: &AmrisOverrides) {
    if let Some(a) = o.a {
        cfg.amris.a = a;
    }
    if let Some(b) = o.b {
        cfg.amris.b = b;
    }
    if let Some(c) = o.c {
        cfg.amris.c = c;
    }
}

/// Starts a hash over the effective config. The baseline enters by content, not path.
fn config_hasher(command: &str, cfg: &RunConfig) -> Result<(ConfigHasher, Option<Vec<f64>>)> {
    let mut hashed = cfg.clone();
    hashed.mask.baseline = None;
    let mut h = ConfigHasher::new(command);
    h.params("config", &hashed);
    let baseline = match &cfg.mask.baseline {
        Some(path) => {
            let bytes = read_bytes(path)?;
            h.bytes("baseline", &bytes);
            Some(parse_baseline(&bytes)?)
        }
        None => None,
    };
    Ok((h, baseline))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

struct LoadedGames {
    ids: Vec<String>,
    games: Vec<Box<dyn Game>>,
}

fn load_games(path: &Path, cfg: &RunConfig, baseline: Option<Vec<f64>>, h: &mut ConfigHasher) -> Result<LoadedGames> {
    let bytes = read_bytes(path)?;
    h.bytes("games", &bytes);
    let set: GameSetFile =
        serde_json::from_slice(&bytes).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    if set.games.is_empty() {
        return Err(Error::EmptyInputSet.into());
    }
    let scorer = if set.needs_scorer() {
        let ep = cfg
            .scorer
            .clone()
            .ok_or_else(|| Error::ScorerUnavailable("games need an external scorer but none is configured".into()))?;
        Some(Arc::new(ExternalScorer::spawn(ep)?))
    } else {
        None
    };
    let ctx = GameContext { mask: &cfg.mask, baseline, scorer };
    let mut ids: Vec<String> = Vec::new();
    let mut games = Vec::new();
    for entry in &set.games {
        if ids.contains(&entry.id) {
            return Err(Error::DuplicateInputId(entry.id.clone()).into());
        }
        games.push(entry.build(&ctx).with_context(|| format!("building game `{}`", entry.id))?);
        ids.push(entry.id.clone());
    }
    Ok(LoadedGames { ids, games })
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

#[derive(Serialize)]
struct GameDecomposition<'a> {
    game_id: &'a str,
    n: usize,
    #[serde(flatten)]
    report: DecompositionReport,
}

#[derive(Serialize)]
struct DecompositionBody<'a> {
    games: Vec<GameDecomposition<'a>>,
}

fn cmd_exact(args: &ExactArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    apply_game_overrides(&mut cfg, &args.game);
    cfg.validate()?;
    if args.pair.as_ref().is_some_and(|p| p.len() != 2) {
        return Err(Error::InvalidConfig("--pair takes exactly two players, e.g. 0,1".into()).into());
    }
    let (mut h, baseline) = config_hasher("exact", &cfg)?;
    h.params("pair", &args.pair);
    let loaded = load_games(&args.games, &cfg, baseline, &mut h)?;
    let prov = Provenance::new(h.finish());

    let mut rows = Vec::new();
    let mut decompositions = Vec::new();
    for (id, game) in loaded.ids.iter().zip(&loaded.games) {
        let table = TableGame::tabulate(game.as_ref(), cfg.exact.enumeration_limit)?;
        let n = table.n();
        let pairs = match &args.pair {
            Some(p) => vec![(p[0], p[1])],
            None => all_pairs(n),
        };
        let per_pair = pairs
            .par_iter()
            .map(|&(i, j)| interaction_orders(&table, i, j))
            .collect::<Result<Vec<_>, _>>()?;
        for (&(i, j), values) in pairs.iter().zip(&per_pair) {
            for (m, v) in values.iter().enumerate() {
                rows.push(vec![id.clone(), i.to_string(), j.to_string(), m.to_string(), num(*v)]);
            }
        }
        decompositions.push(GameDecomposition { game_id: id, n, report: decompose(&table, &cfg.exact)? });
    }

    let mut out = OutputSet::default();
    out.add("interactions.csv", csv_document(&prov, &["game_id", "i", "j", "m", "interaction"], &rows));
    let body = DecompositionBody { games: decompositions };
    out.add("decomposition.json", json_document(&Stamped { provenance: &prov, command: "exact", body }));
    Ok(out)
}

fn cmd_estimate(args: &EstimateArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    apply_game_overrides(&mut cfg, &args.game);
    apply_sample_overrides(&mut cfg, &args.sample);
    cfg.validate()?;
    let (mut h, baseline) = config_hasher("estimate", &cfg)?;
    let loaded = load_games(&args.games, &cfg, baseline, &mut h)?;
    let prov = Provenance::new(h.finish());

    let mut rows = Vec::new();
    for (id, game) in loaded.ids.iter().zip(&loaded.games) {
        let n = game.n();
        if n < 2 {
            return Err(Error::InvalidGame(format!("game `{id}` has fewer than two players")).into());
        }
        let key = hash_str(id);
        let orders = cfg.sample.orders(n)?;
        let cells: Vec<(usize, usize, usize)> = sample_pairs(n, cfg.sample.pairs_per_input, cfg.sample.seed, key)
            .into_iter()
            .flat_map(|(i, j)| orders.iter().map(move |&m| (i, j, m)))
            .collect();
        let estimates = cells
            .par_iter()
            .map(|&(i, j, m)| estimate_interaction_keyed(game.as_ref(), key, i, j, m, &cfg.sample))
            .collect::<Result<Vec<_>, _>>()?;
        for e in estimates {
            rows.push(vec![
                id.clone(),
                e.i.to_string(),
                e.j.to_string(),
                e.m.to_string(),
                num(e.mean),
                num(e.std_error),
                e.n_samples.to_string(),
                e.exhaustive.to_string(),
            ]);
        }
    }
    let mut out = OutputSet::default();
    let header = ["game_id", "i", "j", "m", "mean", "std_error", "n_samples", "exhaustive"];
    out.add("estimates.csv", csv_document(&prov, &header, &rows));
    Ok(out)
}

fn cmd_profile(args: &ProfileArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    apply_game_overrides(&mut cfg, &args.game);
    apply_sample_overrides(&mut cfg, &args.sample);
    cfg.validate()?;
    let (mut h, baseline) = config_hasher("profile", &cfg)?;
    h.params("model_id", &args.model_id);
    let loaded = load_games(&args.games, &cfg, baseline, &mut h)?;
    let prov = Provenance::new(h.finish());

    let inputs = InputSet::new(loaded.ids.into_iter().zip(loaded.games).collect())?;
    let raw = raw_order_strength(&inputs, &cfg.sample)?;
    let profile = profile_from_raw(args.model_id.clone(), &raw)?;

    let rows: Vec<Vec<String>> = profile
        .orders
        .iter()
        .zip(&raw.values)
        .zip(&profile.j)
        .map(|((&m, &r), &j)| {
            vec![profile.model_id.clone(), m.to_string(), num(m as f64 / profile.n as f64), num(r), num(j)]
        })
        .collect();
    let mut out = OutputSet::default();
    out.add("profile.json", json_document(&ProfileFile::from_profile(&profile, prov.tool_version, &prov.config_hash)));
    out.add("j_curve.csv", csv_document(&prov, &["model_id", "m", "order", "raw", "J"], &rows));
    Ok(out)
}

fn load_profiles(paths: &[PathBuf], h: &mut ConfigHasher) -> Result<Vec<StrengthProfile>> {
    paths
        .iter()
        .map(|p| {
            let bytes = read_bytes(p)?;
            h.bytes("profile", &bytes);
            let file: ProfileFile =
                serde_json::from_slice(&bytes).map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?;
            file.to_profile().with_context(|| format!("profile {}", p.display()))
        })
        .collect()
}

fn load_metrics(path: &Path, h: &mut ConfigHasher) -> Result<MetricTable> {
    let bytes = read_bytes(path)?;
    h.bytes("metrics", &bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::InvalidConfig(format!("{} is not UTF-8", path.display())))?;
    parse_metrics(&text)
}

fn j_curve_rows(profiles: &[StrengthProfile]) -> Vec<Vec<String>> {
    let mut sorted: Vec<&StrengthProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    sorted
        .iter()
        .flat_map(|p| {
            p.orders
                .iter()
                .zip(&p.j)
                .map(|(&m, &j)| vec![p.model_id.clone(), m.to_string(), num(m as f64 / p.n as f64), num(j)])
        })
        .collect()
}

fn scatter_rows(report: &CorrelationReport, table: &MetricTable) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for c in &report.correlations {
        for (model, &a) in report.models.iter().zip(&report.amris) {
            rows.push(vec![model.clone(), c.metric.clone(), num(a), num(table.get(model, &c.metric)?)]);
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct AmrisEntry<'a> {
    model_id: &'a str,
    amris: f64,
}

#[derive(Serialize)]
struct AmrisBody<'a> {
    params: AmrisParams,
    models: Vec<AmrisEntry<'a>>,
}

fn cmd_amris(args: &AmrisArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    apply_amris_overrides(&mut cfg, &args.amris);
    cfg.validate()?;
    let mut h = ConfigHasher::new("amris");
    h.params("amris", &cfg.amris);
    let profiles = load_profiles(&args.profiles, &mut h)?;
    let prov = Provenance::new(h.finish());
    let models = profiles
        .iter()
        .map(|p| {
            amris(p, &cfg.amris)
                .map(|v| AmrisEntry { model_id: &p.model_id, amris: v })
                .with_context(|| format!("AMRIS of `{}`", p.model_id))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = OutputSet::default();
    let body = AmrisBody { params: cfg.amris, models };
    out.add("amris.json", json_document(&Stamped { provenance: &prov, command: "amris", body }));
    Ok(out)
}

fn cmd_gridsearch(args: &GridsearchArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    if let Some(s) = args.step {
        cfg.search.step = s;
    }
    cfg.validate()?;
    let mut h = ConfigHasher::new("gridsearch");
    h.params("search", &cfg.search);
    let profiles = load_profiles(&args.profiles, &mut h)?;
    let table = load_metrics(&args.metrics, &mut h)?;
    let prov = Provenance::new(h.finish());

    let report = grid_search(&profiles, &table, cfg.search.step)?;
    let mut out = OutputSet::default();
    out.add("scatter.csv", csv_document(&prov, &["model_id", "metric", "amris", "value"], &scatter_rows(&report.best, &table)?));
    out.add("j_curves.csv", csv_document(&prov, &["model_id", "m", "order", "J"], &j_curve_rows(&profiles)));
    out.add("gridsearch.json", json_document(&Stamped { provenance: &prov, command: "gridsearch", body: report }));
    Ok(out)
}

#[derive(Serialize)]
struct CorrelateBody {
    #[serde(flatten)]
    report: CorrelationReport,
    low_confidence: bool,
}

fn cmd_correlate(args: &CorrelateArgs, mut cfg: RunConfig) -> Result<OutputSet> {
    apply_amris_overrides(&mut cfg, &args.amris);
    cfg.validate()?;
    let mut h = ConfigHasher::new("correlate");
    h.params("amris", &cfg.amris);
    let profiles = load_profiles(&args.profiles, &mut h)?;
    let table = load_metrics(&args.metrics, &mut h)?;
    let prov = Provenance::new(h.finish());

    let report = correlate(&profiles, &table, cfg.amris)?;
    let mut out = OutputSet::default();
    out.add("scatter.csv", csv_document(&prov, &["model_id", "metric", "amris", "value"], &scatter_rows(&report, &table)?));
    out.add("j_curves.csv", csv_document(&prov, &["model_id", "m", "order", "J"], &j_curve_rows(&profiles)));
    let body = CorrelateBody { low_confidence: report.models.len() <= LOW_CONFIDENCE_MODELS, report };
    out.add("correlation.json", json_document(&Stamped { provenance: &prov, command: "correlate", body }));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, status: if passed { Status::Pass } else { Status::Fail }, detail }
    }

    fn skipped(name: &'static str, detail: &str) -> Self {
        Self { name, status: Status::Skipped, detail: detail.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub file: String,
    pub n: usize,
    pub pair: [usize; 2],
    pub checks: Vec<Check>,
    /// Reported, not checked: whether the mid band gained J mass under suppression.
    pub suppression: Option<SuppressionEffect>,
    pub mid_band_increased: Option<bool>,
}

#[derive(Serialize)]
struct VerifyBody {
    all_passed: bool,
    tables: Vec<TableReport>,
}

fn cmd_verify(args: &VerifyArgs, cfg: RunConfig) -> Result<(OutputSet, bool)> {
    cfg.validate()?;
    let mut h = ConfigHasher::new("verify");
    h.params("verify", &cfg.verify).params("exact", &cfg.exact);
    let mut tables = Vec::new();
    for path in &args.rewards {
        let bytes = read_bytes(path)?;
        h.bytes("rewards", &bytes);
        let file: RewardTableFile =
            serde_json::from_slice(&bytes).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let table = file.to_table().with_context(|| format!("reward table {}", path.display()))?;
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        tables.push(verify_table(&name, &table, &cfg)?);
    }
    let prov = Provenance::new(h.finish());
    let all_passed = tables.iter().all(|t| t.checks.iter().all(|c| c.status != Status::Fail));

    let mut rows = Vec::new();
    for t in &tables {
        for c in &t.checks {
            let status = serde_json::to_value(c.status).expect("status serializes");
            rows.push(vec![t.file.clone(), c.name.to_string(), status.as_str().unwrap_or_default().to_string(), c.detail.clone()]);
        }
    }
    let mut out = OutputSet::default();
    out.add("verify.csv", csv_document(&prov, &["table", "check", "status", "detail"], &rows));
    let body = VerifyBody { all_passed, tables };
    out.add("verify.json", json_document(&Stamped { provenance: &prov, command: "verify", body }));
    Ok((out, all_passed))
}

/// Runs every reward-table check on one table.
pub fn verify_table(name: &str, table: &RewardTable, cfg: &RunConfig) -> Result<TableReport> {
    let n = table.n();
    let (i, j) = table.pair();
    let kmax = cfg.verify.max_order.min(n - 2);
    let game = game_from_rewards(table)?;
    let nonnegative = table.rewards().values().all(|&r| r >= 0.0);
    let positive = table.rewards().values().all(|&r| r > 0.0);
    let mut checks = Vec::new();

    // I^(k) of the generated game against the closed-form reward sum
    let mut worst = 0.0f64;
    for k in 0..=kmax {
        let exact = interaction_exact(&game, i, j, k, &cfg.exact)?;
        let expected = table.reward_sum(k)?;
        worst = worst.max((exact - expected).abs() / expected.abs().max(1.0));
    }
    checks.push(Check::new("reward_sum_identity", worst <= 1e-9, format!("max relative error {}", num(worst))));

    if nonnegative {
        let mut violations = Vec::new();
        for k in 1..=kmax {
            if table.reward_sum(k)? == 0.0 {
                continue;
            }
            for r in 0..=k {
                let ratio = cutout_ratio(table, k, r)?;
                let mass_above = (r + 1..=k).any(|q| table.size_mean(q) > 0.0);
                let ok = if r == k { ratio == 1.0 } else if mass_above { ratio < 1.0 } else { ratio <= 1.0 };
                if !ok {
                    violations.push(format!("k={k} r={r} ratio={}", num(ratio)));
                }
            }
        }
        let detail = if violations.is_empty() { format!("orders 1..={kmax}") } else { violations.join("; ") };
        checks.push(Check::new("cutout_ratio", violations.is_empty(), detail));
    } else {
        checks.push(Check::skipped("cutout_ratio", "table has negative rewards"));
    }

    // mixing with the suppressed table: I_w = I_u + I_v
    let other = game_from_rewards(&suppress_low_order(table, cfg.verify.threshold, cfg.verify.factor)?)?;
    let mixed = mix_games(&game, &other)?;
    let mut worst = 0.0f64;
    for k in 0..=kmax {
        let w = interaction_exact(&mixed, i, j, k, &cfg.exact)?;
        let u = interaction_exact(&game, i, j, k, &cfg.exact)?;
        let v = interaction_exact(&other, i, j, k, &cfg.exact)?;
        worst = worst.max((w - (u + v)).abs() / w.abs().max(1.0));
    }
    checks.push(Check::new("mixing_linearity", worst <= 1e-12, format!("max relative error {}", num(worst))));

    let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for (&from, &to) in rest.iter().zip(rest.iter().rev()) {
        perm[from] = to;
    }
    let invariant = reward_shift_invariance_check(table, &perm)?;
    checks.push(Check::new("relabel_invariance", invariant, format!("permutation {perm:?}")));

    let (suppression, mid_band_increased) = if positive {
        let effect = suppression_effect(table, cfg.verify.threshold, cfg.verify.factor)?;
        checks.push(Check::new(
            "suppression_low_band",
            effect.low_decreased(),
            format!("low-band J {} -> {}", num(effect.low_before), num(effect.low_after)),
        ));
        let mid = effect.mid_increased();
        (Some(effect), Some(mid))
    } else {
        checks.push(Check::skipped("suppression_low_band", "table is not strictly positive"));
        (None, None)
    };

    Ok(TableReport { file: name.to_string(), n, pair: [i, j], checks, suppression, mid_band_increased })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServeInputs {
    shape: Vec<usize>,
    scorer: BuiltinScorer,
    #[serde(default = "logit")]
    output: OutputKind,
    inputs: std::collections::BTreeMap<String, Vec<f64>>,
}

fn logit() -> OutputKind {
    OutputKind::Logit
}

fn cmd_serve(args: &ServeArgs, cfg: RunConfig) -> Result<()> {
    cfg.validate()?;
    let spec: ServeInputs = read_json(&args.inputs)?;
    let mut mask = MaskSpec::grid(spec.shape, cfg.mask.rows, cfg.mask.cols)?;
    if let Some(path) = args.baseline.as_ref().or(cfg.mask.baseline.as_ref()) {
        mask = mask.with_baseline(parse_baseline(&read_bytes(path)?)?)?;
    }
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    serve(stdin.lock(), stdout.lock(), &spec.inputs, &mask, &spec.scorer, spec.output)?;
    Ok(())
}

/// Machine-readable error record for a failed command.
pub fn error_record(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<Error>().map(Error::kind))
        .or_else(|| err.chain().find_map(|e| e.downcast_ref::<std::io::Error>().map(|_| "Io")))
        .unwrap_or("Other");
    serde_json::json!({
        "error": kind,
        "message": format!("{err:#}"),
        "tool_version": crate::output::TOOL_VERSION,
    })
}
