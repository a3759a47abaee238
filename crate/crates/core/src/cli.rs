//! Command-line front end.
//!
//! Every subcommand reads its parameters from flags, falling back to a flat
//! JSON config file (`--config`), then to built-in defaults. Keys in the
//! file are the long flag names with `-` replaced by `_`. Stochastic
//! commands also accept the seed from `CONTEXT_TPP_SEED`; there is no
//! clock-based seeding.
//!
//! Exit status: 0 success, 1 a checked property failed, 2 usage or input
//! error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::game::{
    ex_ante_expected_payoffs, realized_payoffs, LotteryOutcome, ThirdPartyAction, TransferLevel,
    Treatment, TreatmentId,
};
use crate::nccm::{
    assumption3_crossing, format_table_b1, proposition_sweep, table_b1, verify_proposition2,
    Crossing, NccmParams, PartworthSchedule, PartworthTable, ScheduleConfig,
};
use crate::risk::{
    classify_risk, crra_interval, expected_value_choices, lottery_table, lottery_table_csv,
    ChoiceVector, QUESTIONS,
};
use crate::saito::{
    oracle_equivalence, punish_residuals, ranking_report, FsParams, LotteryKind, RankingGrid,
};
use crate::simulate::{
    sample_population, simulate_dataset, AllocationRule, ChoiceDataset, ParamDist, PopulationSpec,
    RunManifest,
};
use crate::stats::{analyze, format_summary, format_tests, RankSumMethod};

pub const SEED_ENV: &str = "CONTEXT_TPP_SEED";
pub const DEFAULT_PRECISION: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tpp",
    version,
    about = "Third-party punishment and context-effect models"
)]
struct Cli {
    /// Flat JSON object of defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Decimals in printed numbers.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Both sides of the investment-share condition over a concavity grid.
    Tableb1(TableB1Args),
    /// Shared concavity at which the investment-share condition turns.
    Crossing(CrossingArgs),
    /// Randomized sweep of both proposition checks.
    Props(PropsArgs),
    /// Closed-form inequity-aversion partworths against the brute-force oracle.
    SaitoCheck(SaitoArgs),
    /// Risk elicitation table, CRRA intervals and classification.
    HoltLaury(HoltLauryArgs),
    /// Payoffs for one decision.
    Payoff(PayoffArgs),
    /// Simulate a strategy-method dataset.
    Simulate(SimulateArgs),
    /// Summaries and tests for a dataset CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct TableB1Args {
    #[arg(long)]
    b: Option<f64>,
    /// Shared concavities, comma separated.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Also print the grid as a table.
    #[arg(long)]
    table: bool,
    /// JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CrossingArgs {
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct PropsArgs {
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shared concavity of the canonical check.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SaitoArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for ranking CSVs and the residual report.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HoltLauryArgs {
    /// Ten picks such as LLLLRRRRRR.
    #[arg(long)]
    choices: Option<String>,
    /// CSV output file for the lottery table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PayoffArgs {
    #[arg(long)]
    treatment: Option<String>,
    #[arg(long)]
    t: Option<i64>,
    #[arg(long)]
    p: Option<i64>,
    #[arg(long)]
    z: Option<i64>,
    /// win or lose; omit to see the expectation and both branches.
    #[arg(long)]
    outcome: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// expected-share, multinomial-tokens or argmax-all-in.
    #[arg(long)]
    rule: Option<String>,
    /// Comma separated, default all five.
    #[arg(long, value_delimiter = ',')]
    treatments: Option<Vec<String>>,
    /// Shared concavity for both attributes.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c_material: Option<f64>,
    #[arg(long)]
    c_psych: Option<f64>,
    /// Shared concavity drawn uniformly from `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    c_uniform: Option<Vec<f64>>,
    #[arg(long)]
    b: Option<f64>,
    /// Model the equal split with zero psychological gaps.
    #[arg(long)]
    include_fair_transfer: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Dataset CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path, default `<out stem>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Leave the creation time out of the manifest.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// auto, exact or normal.
    #[arg(long)]
    method: Option<String>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

const CONFIG_KEYS: &[&str] = &[
    "b",
    "c",
    "table",
    "out",
    "tol",
    "draws",
    "seed",
    "alpha",
    "beta",
    "delta",
    "out_dir",
    "choices",
    "treatment",
    "t",
    "p",
    "z",
    "outcome",
    "n",
    "rule",
    "treatments",
    "c_material",
    "c_psych",
    "c_uniform",
    "include_fair_transfer",
    "workers",
    "manifest",
    "no_timestamp",
    "input",
    "method",
    "precision",
];

struct Config {
    values: Map<String, Value>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Config { values: Map::new() });
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
        let Value::Object(values) = value else {
            return Err(Failure::Usage("config must be a JSON object".into()));
        };
        if let Some(bad) = values.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Failure::Usage(format!("config: unknown key `{bad}`")));
        }
        Ok(Config { values })
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Failure::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    fn or<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, Failure> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, Failure> {
        Ok(flag || self.or(None, key, false)?)
    }

    fn required<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T, Failure> {
        self.get(flag, key)?
            .ok_or_else(|| Failure::Usage(format!("missing required --{}", key.replace('_', "-"))))
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64, Failure> {
        if let Some(seed) = self.get(flag, "seed")? {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|e| Failure::Usage(format!("{SEED_ENV}=`{s}`: {e}"))),
            Err(_) => Err(Failure::Usage(format!(
                "a seed is required: pass --seed, set `seed` in the config, or set {SEED_ENV}"
            ))),
        }
    }
}

/// Parses `argv` (program name first) and runs the command, writing
/// human-readable output to stdout and diagnostics to stderr.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_output(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_output<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "check failed: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    let cfg = Config::load(cli.config.as_deref())?;
    let precision = cfg.get(cli.precision, "precision")?;
    let prec = precision.unwrap_or(DEFAULT_PRECISION);
    match cli.command {
        // two decimals match the published table unless asked otherwise
        Command::Tableb1(a) => cmd_tableb1(a, &cfg, precision.unwrap_or(2), out),
        Command::Crossing(a) => cmd_crossing(a, &cfg, prec, out),
        Command::Props(a) => cmd_props(a, &cfg, prec, out),
        Command::SaitoCheck(a) => cmd_saito(a, &cfg, prec, out),
        Command::HoltLaury(a) => cmd_holt_laury(a, &cfg, prec, out),
        Command::Payoff(a) => cmd_payoff(a, &cfg, out),
        Command::Simulate(a) => cmd_simulate(a, &cfg, prec, out),
        Command::Analyze(a) => cmd_analyze(a, &cfg, prec, out),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_tableb1(a: TableB1Args, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let b = cfg.or(a.b, "b", 0.05)?;
    let cs = cfg.or(a.c, "c", vec![0.5, 0.4, 0.3, 0.2, 0.1])?;
    let rows = table_b1(&PartworthTable::canonical(), b, &cs)?;
    for r in &rows {
        writeln!(
            out,
            "c={} LHS={:.p$} RHS={:.p$} holds={}",
            r.c,
            r.lhs,
            r.rhs,
            r.holds,
            p = prec
        )?;
    }
    if cfg.flag(a.table, "table")? {
        writeln!(out)?;
        write!(out, "{}", format_table_b1(&rows, prec))?;
    }
    if let Some(path) = cfg.get(a.out, "out")? {
        write_json(&path, &rows)?;
    }
    Ok(())
}

fn cmd_crossing(a: CrossingArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let b = cfg.or(a.b, "b", 0.05)?;
    let tol = cfg.or(a.tol, "tol", 1e-5)?;
    match assumption3_crossing(&PartworthTable::canonical(), b, tol)? {
        Crossing::At(c) => writeln!(out, "c* = {c:.prec$}")?,
        Crossing::NoCrossing => writeln!(out, "c* = none (no sign change on (0, 1))")?,
    }
    Ok(())
}

fn cmd_props(a: PropsArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let draws = cfg.or(a.draws, "draws", 1000)?;
    let seed = cfg.seed(a.seed)?;
    let c = cfg.or(a.c, "c", 0.7)?;
    let b = cfg.or(a.b, "b", 0.05)?;
    let sweep = proposition_sweep(draws, seed);
    writeln!(
        out,
        "punishment share: {} draws, {} comparisons, {} violations",
        sweep.draws, sweep.comparisons, sweep.prop1_failures
    )?;
    writeln!(
        out,
        "investment share: {} asserted, {} violations; {} unasserted, {} reversals",
        sweep.prop2_asserted,
        sweep.prop2_failures,
        sweep.prop2_unasserted,
        sweep.prop2_unasserted_reversals
    )?;
    let params = NccmParams::shared(c, b)?;
    let canonical = PartworthSchedule::constant(PartworthTable::canonical());
    let report = verify_proposition2(&canonical, &params, &[TransferLevel::ALL[0]])?;
    let row = report.rows[0];
    writeln!(
        out,
        "canonical c={c} b={b}: condition holds={} Pr(I|PI0)={:.p$} Pr(I|I0)={:.p$} increase={}",
        row.assumption3.holds,
        row.pr_i_full,
        row.pr_i_invest_only,
        row.inequality_holds,
        p = prec
    )?;
    if let Some(path) = cfg.get(a.out, "out")? {
        write_json(
            &path,
            &serde_json::json!({ "seed": seed, "sweep": sweep, "canonical": report }),
        )?;
    }
    if !sweep.passed() {
        return Err(Failure::Check(format!(
            "{} punishment-share and {} investment-share violations",
            sweep.prop1_failures, sweep.prop2_failures
        )));
    }
    Ok(())
}

fn cmd_saito(a: SaitoArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let params = FsParams::new(
        cfg.or(a.alpha, "alpha", 0.8)?,
        cfg.or(a.beta, "beta", 0.4)?,
        cfg.or(a.delta, "delta", 0.5)?,
    )?;
    let tol = cfg.or(a.tol, "tol", 1e-9)?;
    let t_grid: Vec<f64> = (0..=10).map(|k| 5.0 * k as f64).collect();
    let x_grid: Vec<f64> = (1..=100).map(|k| 0.5 * k as f64).collect();
    let mut failed = Vec::new();
    for check in oracle_equivalence(&params, &t_grid, &x_grid, tol)? {
        writeln!(
            out,
            "{:<24} {:>5} points  max |err| = {:.3e}  {}",
            check.formula,
            check.points,
            check.max_abs_error,
            if check.passed() { "ok" } else { "FAIL" }
        )?;
        if !check.passed() {
            failed.push(check.formula.to_string());
        }
    }
    let grid = RankingGrid::default();
    let mut reports = Vec::new();
    for lottery in [LotteryKind::ZeroReturn, LotteryKind::NegativeReturn] {
        let report = ranking_report(&params, &grid, lottery)?;
        writeln!(
            out,
            "ranking {:<8} {:>5} rows  {} ordering failures  {} points with W_TP < W_S",
            lottery.as_str(),
            report.rows.len(),
            report.failures.len(),
            report.tp_below_safe
        )?;
        if !report.passed() {
            failed.push(format!("ranking {}", lottery.as_str()));
        }
        reports.push(report);
    }
    let residuals = punish_residuals(&params, &t_grid, &x_grid)?;
    let worst = residuals
        .iter()
        .map(|r| (r.residual - r.predicted).abs())
        .fold(0.0, f64::max);
    writeln!(
        out,
        "printed punishment residuals: {} points off the first branch, max |residual - predicted| = {:.3e}",
        residuals.len(),
        worst
    )?;
    if residuals.is_empty() || worst.is_nan() || worst > tol {
        failed.push("punishment residual forms".into());
    }
    if let Some(dir) = cfg.get(a.out_dir, "out_dir")? {
        fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        for r in &reports {
            write_text(
                &dir.join(format!("ranking_{}.csv", r.lottery.as_str())),
                &r.to_csv(prec),
            )?;
        }
        write_json(&dir.join("punish_residuals.json"), &residuals)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn cmd_holt_laury(a: HoltLauryArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    writeln!(
        out,
        "{:>2}  {:>5}  {:>12}  {:>12}  {:>8}",
        "q", "p", "L", "R", "E(L)-E(R)"
    )?;
    for pair in lottery_table() {
        writeln!(
            out,
            "{:>2}  {:>5.1}  {:>5}/{:<6}  {:>5}/{:<6}  {:>8}",
            pair.question,
            pair.high_probability(),
            pair.left.0,
            pair.left.1,
            pair.right.0,
            pair.right.1,
            pair.ev_gap()
        )?;
    }
    writeln!(out)?;
    let ev = classify_risk(&expected_value_choices());
    writeln!(
        out,
        "expected-value chooser: switch point {}",
        ev.switch_point
            .map(|s| s.to_string())
            .unwrap_or_else(|| "-".into())
    )?;
    writeln!(out, "CRRA intervals by switch point:")?;
    for k in 1..=QUESTIONS as i64 {
        let iv = crra_interval(k)?;
        let show = |x: f64| {
            if x.is_infinite() {
                if x < 0.0 {
                    "-inf".to_string()
                } else {
                    "+inf".to_string()
                }
            } else {
                format!("{x:.prec$}")
            }
        };
        writeln!(out, "  {k:>2}: ({}, {})", show(iv.lo), show(iv.hi))?;
    }
    if let Some(choices) = cfg.get(a.choices, "choices")? {
        let v: ChoiceVector = choices.parse()?;
        let class = classify_risk(&v);
        let switch = class
            .switch_point
            .map(|s| s.to_string())
            .unwrap_or_else(|| "-".into());
        write!(out, "{v}: {} (switch point {switch})", class.attitude)?;
        if let Some(s) = class.switch_point {
            write!(out, " r in {}", crra_interval(s as i64)?)?;
        }
        writeln!(out)?;
    }
    if let Some(path) = cfg.get(a.out, "out")? {
        write_text(&path, &lottery_table_csv())?;
    }
    Ok(())
}

fn cmd_payoff(a: PayoffArgs, cfg: &Config, out: &mut dyn Write) -> Outcome {
    let id: TreatmentId = cfg.required(a.treatment, "treatment")?.parse()?;
    let treatment = Treatment::new(id);
    let t = TransferLevel::new(cfg.required(a.t, "t")?)?;
    let action = ThirdPartyAction::new(cfg.or(a.p, "p", 0)?, cfg.or(a.z, "z", 0)?);
    let outcome: Option<String> = cfg.get(a.outcome, "outcome")?;
    match outcome {
        Some(o) => {
            let o: LotteryOutcome = o.parse()?;
            writeln!(out, "{}", realized_payoffs(&treatment, t, &action, o)?)?;
        }
        None if action.investment == 0 => {
            let v = realized_payoffs(&treatment, t, &action, LotteryOutcome::NotApplicable)?;
            writeln!(out, "{v}")?;
        }
        None => {
            writeln!(
                out,
                "expected {}",
                ex_ante_expected_payoffs(&treatment, t, &action)?
            )?;
            for o in [LotteryOutcome::Win, LotteryOutcome::Lose] {
                let v = realized_payoffs(&treatment, t, &action, o)?;
                writeln!(out, "{:<8} {v}", format!("{o:?}").to_lowercase())?;
            }
        }
    }
    Ok(())
}

fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.manifest.json"))
}

fn cmd_simulate(a: SimulateArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let seed = cfg.seed(a.seed)?;
    let n = cfg.or(a.n, "n", 100)?;
    let rule: AllocationRule = match cfg.get(a.rule, "rule")? {
        Some(s) => s.parse::<AllocationRule>()?,
        None => AllocationRule::default(),
    };
    let treatments: Vec<TreatmentId> = match cfg.get(a.treatments, "treatments")? {
        Some(list) => list
            .iter()
            .map(|s| s.parse::<TreatmentId>())
            .collect::<Result<_, _>>()?,
        None => TreatmentId::ALL.to_vec(),
    };
    let defaults = NccmParams::default();
    let shared = cfg.get(a.c, "c")?;
    let uniform: Option<Vec<f64>> = cfg.get(a.c_uniform, "c_uniform")?;
    let b = cfg.or(a.b, "b", defaults.b)?;
    let mut spec = PopulationSpec::point_mass(n, seed);
    spec.b = ParamDist::point(b);
    spec.schedule = ScheduleConfig {
        include_fair_transfer: cfg.flag(a.include_fair_transfer, "include_fair_transfer")?,
        ..ScheduleConfig::default()
    };
    if let Some(bounds) = uniform {
        let [lo, hi] = bounds[..] else {
            return Err(Failure::Usage("--c-uniform takes `lo,hi`".into()));
        };
        spec.c_material = ParamDist::uniform(lo, hi);
        spec.shared_concavity = true;
    } else {
        let c_m = cfg
            .get(a.c_material, "c_material")?
            .or(shared)
            .unwrap_or(defaults.c_material);
        let c_p = cfg
            .get(a.c_psych, "c_psych")?
            .or(shared)
            .unwrap_or(defaults.c_psych);
        spec.c_material = ParamDist::point(c_m);
        spec.c_psych = ParamDist::point(c_p);
    }
    let workers = cfg.or(a.workers, "workers", 0)?;
    let csv_path: PathBuf = cfg.required(a.out, "out")?;
    let agents = sample_population(&spec)?;
    let dataset = simulate_dataset(&agents, &treatments, rule, workers)?;
    let file = fs::File::create(&csv_path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", csv_path.display())))?;
    dataset.write_csv(std::io::BufWriter::new(file))?;
    let manifest = RunManifest::new(
        &spec,
        &treatments,
        rule,
        !cfg.flag(a.no_timestamp, "no_timestamp")?,
    );
    let manifest_file = cfg
        .get(a.manifest, "manifest")?
        .unwrap_or_else(|| manifest_path(&csv_path));
    write_json(&manifest_file, &manifest)?;
    let punish: Vec<f64> = dataset.rows.iter().map(|r| r.deduction as f64).collect();
    writeln!(
        out,
        "{} agents x {} treatments -> {} rows, seed {seed}, rule {rule:?}; mean deduction per row {:.p$}",
        agents.len(),
        treatments.len(),
        dataset.rows.len(),
        punish.iter().sum::<f64>() / punish.len() as f64,
        p = prec
    )?;
    writeln!(
        out,
        "wrote {} and {}",
        csv_path.display(),
        manifest_file.display()
    )?;
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs, cfg: &Config, prec: usize, out: &mut dyn Write) -> Outcome {
    let input: PathBuf = cfg.required(a.input, "input")?;
    let method = match cfg.get(a.method, "method")?.as_deref() {
        None | Some("auto") => RankSumMethod::Auto,
        Some("exact") => RankSumMethod::Exact,
        Some("normal") => RankSumMethod::NormalApprox,
        Some(other) => {
            return Err(Failure::Usage(format!(
                "--method `{other}`: expected auto, exact or normal"
            )))
        }
    };
    let file =
        fs::File::open(&input).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
    let dataset = ChoiceDataset::read_csv(std::io::BufReader::new(file))
        .map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
    let report = analyze(&dataset, method)?;
    writeln!(out, "{} agents", report.agents)?;
    write!(out, "{}", format_summary(&report.summary, prec))?;
    writeln!(out)?;
    write!(out, "{}", format_tests(&report.tests, prec))?;
    if let Some(path) = cfg.get(a.out, "out")? {
        write_json(&path, &report)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("tpp").chain(args.iter().copied());
        let code = run_with_output(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn tableb1_row() {
        let (code, out, _) = run(&["tableb1", "--b", "0.05", "--c", "0.5"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "c=0.5 LHS=119.77 RHS=85.04 holds=true");
    }

    #[test]
    fn crossing_line() {
        let (code, out, _) = run(&["crossing", "--b", "0.05", "--tol", "1e-5"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "c* = 0.6469");
    }

    #[test]
    fn payoff_line() {
        let (code, out, _) = run(&[
            "payoff",
            "--treatment",
            "PI0",
            "--t",
            "10",
            "--p",
            "18",
            "--z",
            "14",
            "--outcome",
            "win",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "A=36 B=10 C=46");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["nope"]).0, 2);
        assert_eq!(run(&["tableb1", "--bogus"]).0, 2);
        assert_eq!(run(&["payoff", "--treatment", "XX", "--t", "10"]).0, 2);
        let (code, _, err) = run(&["payoff", "--treatment", "P", "--t", "15"]);
        assert_eq!(code, 2);
        assert!(err.contains("error"));
        assert_eq!(run(&["--help"]).0, 0);
    }
}
