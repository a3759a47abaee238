//! Synthetic strategy-method datasets.
//!
//! Each agent carries its own NCCM parameters and partworth schedule and
//! answers every treatment at all six transfer levels. The logit model
//! picks one option; an [`AllocationRule`] turns the choice probabilities
//! into a split of the 50-token budget.
//!
//! Randomness comes from per-agent ChaCha streams (see [`crate::rng`]), so
//! a dataset depends only on the population spec, the treatments and the
//! rule, never on how agents are spread across worker threads.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{TransferLevel, Treatment, TreatmentId, BUDGET};
use crate::nccm::{
    build_partworth_schedule, context_probabilities, ChoiceProbabilities, Context, NccmError,
    NccmParams, OptionKind, PartworthSchedule, ScheduleConfig, CONCAVITY_EPS,
};
use crate::risk::RiskAttitude;
use crate::rng::{agent_choice_stream, agent_parameter_stream, stream_rng};
use crate::stats::{mean, median};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("invalid distribution for {param}: {detail}")]
    Distribution { param: &'static str, detail: String },
    #[error("agent {0} has no random stream; MultinomialTokens needs a seeded population")]
    Unseeded(u32),
    #[error("no treatments requested")]
    NoTreatments,
    #[error(transparent)]
    Model(#[from] NccmError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: field `{field}`: {detail}")]
    Field {
        line: u64,
        field: &'static str,
        detail: String,
    },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("agent {agent} treatment {treatment}: {detail}")]
    Layout {
        agent: u32,
        treatment: TreatmentId,
        detail: String,
    },
    #[error("empty dataset")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDist {
    Point { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ParamDist {
    pub fn point(value: f64) -> Self {
        ParamDist::Point { value }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        ParamDist::Uniform { lo, hi }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            ParamDist::Point { value } => (value, value),
            ParamDist::Uniform { lo, hi } => (lo, hi),
        }
    }

    fn validate(&self, param: &'static str, lo_ok: f64, hi_ok: f64) -> Result<(), SimulationError> {
        let (lo, hi) = self.bounds();
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(SimulationError::Distribution {
                param,
                detail: format!("bounds [{lo}, {hi}] are not an interval"),
            });
        }
        if lo <= lo_ok || hi >= hi_ok {
            return Err(SimulationError::Distribution {
                param,
                detail: format!("[{lo}, {hi}] must lie strictly inside ({lo_ok}, {hi_ok})"),
            });
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamDist::Point { value } => value,
            ParamDist::Uniform { lo, hi } if lo == hi => lo,
            ParamDist::Uniform { lo, hi } => rng.gen_range(lo..hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n: usize,
    pub c_material: ParamDist,
    /// Ignored when `shared_concavity` is set.
    pub c_psych: ParamDist,
    /// Use the material draw for both attributes.
    #[serde(default)]
    pub shared_concavity: bool,
    pub b: ParamDist,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub risk_class: Option<RiskAttitude>,
    pub master_seed: u64,
}

impl PopulationSpec {
    /// Every agent at the default model parameters.
    pub fn point_mass(n: usize, master_seed: u64) -> Self {
        let d = NccmParams::default();
        PopulationSpec {
            n,
            c_material: ParamDist::point(d.c_material),
            c_psych: ParamDist::point(d.c_psych),
            shared_concavity: false,
            b: ParamDist::point(d.b),
            schedule: ScheduleConfig::default(),
            risk_class: None,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.n == 0 {
            return Err(SimulationError::EmptyPopulation);
        }
        self.c_material
            .validate("c_material", CONCAVITY_EPS, 1.0 - CONCAVITY_EPS)?;
        if !self.shared_concavity {
            self.c_psych
                .validate("c_psych", CONCAVITY_EPS, 1.0 - CONCAVITY_EPS)?;
        }
        self.b.validate("b", 0.0, f64::INFINITY)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentProfile {
    pub id: u32,
    pub nccm: NccmParams,
    pub partworths: PartworthSchedule,
    pub risk_class: Option<RiskAttitude>,
    pub master_seed: u64,
    /// Agent index used to derive its random streams; `None` for agents
    /// built by hand without a seed.
    pub stream: Option<u64>,
}

pub fn sample_population(spec: &PopulationSpec) -> Result<Vec<AgentProfile>, SimulationError> {
    spec.validate()?;
    let partworths = build_partworth_schedule(&spec.schedule)?;
    (0..spec.n)
        .map(|i| {
            let mut rng = stream_rng(spec.master_seed, agent_parameter_stream(i as u64));
            let c_material = spec.c_material.sample(&mut rng);
            let c_psych = if spec.shared_concavity {
                c_material
            } else {
                spec.c_psych.sample(&mut rng)
            };
            let b = spec.b.sample(&mut rng);
            Ok(AgentProfile {
                id: i as u32,
                nccm: NccmParams::new(c_material, c_psych, b)?,
                partworths: partworths.clone(),
                risk_class: spec.risk_class,
                master_seed: spec.master_seed,
                stream: Some(i as u64),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationRule {
    /// `50 * Pr` rounded by largest remainder.
    ExpectedShare,
    /// 50 independent single-token draws from `Pr`.
    #[default]
    MultinomialTokens,
    /// Everything on the most likely option.
    ArgmaxAllIn,
}

impl std::str::FromStr for AllocationRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "expectedshare" => Ok(AllocationRule::ExpectedShare),
            "multinomialtokens" | "multinomial" => Ok(AllocationRule::MultinomialTokens),
            "argmaxallin" | "argmax" => Ok(AllocationRule::ArgmaxAllIn),
            _ => Err(format!("unknown allocation rule `{s}`")),
        }
    }
}

/// Token split over (TP, I, S).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TokenSplit {
    pub deduction: u32,
    pub investment: u32,
    pub safe: u32,
}

impl TokenSplit {
    fn add(&mut self, kind: OptionKind, n: u32) {
        match kind {
            OptionKind::TP => self.deduction += n,
            OptionKind::I => self.investment += n,
            OptionKind::S => self.safe += n,
        }
    }

    pub fn total(&self) -> u32 {
        self.deduction + self.investment + self.safe
    }
}

/// Tie-break priority: S first, then I, then TP.
fn tie_rank(kind: OptionKind) -> u8 {
    match kind {
        OptionKind::S => 0,
        OptionKind::I => 1,
        OptionKind::TP => 2,
    }
}

/// Largest-remainder rounding of `budget * Pr`.
pub fn expected_share(pr: &ChoiceProbabilities, budget: u32) -> TokenSplit {
    let mut split = TokenSplit::default();
    let mut remainders = Vec::with_capacity(pr.0.len());
    for (kind, p) in &pr.0 {
        let exact = budget as f64 * p;
        let whole = exact.floor();
        split.add(*kind, whole as u32);
        remainders.push((*kind, exact - whole));
    }
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(tie_rank(a.0).cmp(&tie_rank(b.0))));
    let short = budget.saturating_sub(split.total());
    for (kind, _) in remainders.iter().cycle().take(short as usize) {
        split.add(*kind, 1);
    }
    split
}

pub fn argmax_all_in(pr: &ChoiceProbabilities, budget: u32) -> TokenSplit {
    let best =
        pr.0.iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(tie_rank(b.0).cmp(&tie_rank(a.0))))
            .map(|(k, _)| *k)
            .unwrap_or(OptionKind::S);
    let mut split = TokenSplit::default();
    split.add(best, budget);
    split
}

pub fn multinomial_tokens<R: Rng + ?Sized>(
    pr: &ChoiceProbabilities,
    budget: u32,
    rng: &mut R,
) -> TokenSplit {
    let mut split = TokenSplit::default();
    let dist = WeightedIndex::new(pr.0.iter().map(|(_, p)| *p)).expect("valid probabilities");
    for _ in 0..budget {
        split.add(pr.0[dist.sample(rng)].0, 1);
    }
    split
}

/// One strategy-method decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRow {
    pub agent_id: u32,
    pub treatment: TreatmentId,
    pub transfer: TransferLevel,
    pub deduction: u32,
    pub investment: u32,
    pub safe: u32,
    pub punisher: bool,
    pub investor: bool,
    pub risk_class: Option<RiskAttitude>,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "agent_id",
    "treatment",
    "transfer",
    "deduction",
    "investment",
    "safe",
    "punisher",
    "investor",
    "risk_class",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ChoiceDataset {
    pub rows: Vec<DatasetRow>,
}

fn row(
    agent: &AgentProfile,
    treatment: TreatmentId,
    t: TransferLevel,
    split: TokenSplit,
) -> DatasetRow {
    DatasetRow {
        agent_id: agent.id,
        treatment,
        transfer: t,
        deduction: split.deduction,
        investment: split.investment,
        safe: split.safe,
        punisher: split.deduction >= 1,
        investor: split.investment >= 1,
        risk_class: agent.risk_class,
        seed: agent.master_seed,
    }
}

fn simulate_agent(
    agent: &AgentProfile,
    treatments: &[TreatmentId],
    rule: AllocationRule,
) -> Result<Vec<DatasetRow>, SimulationError> {
    let mut rows = Vec::with_capacity(treatments.len() * TransferLevel::ALL.len());
    for &treatment in treatments {
        let mut rng = match (rule, agent.stream) {
            (AllocationRule::MultinomialTokens, None) => {
                return Err(SimulationError::Unseeded(agent.id))
            }
            (_, Some(stream)) => Some(stream_rng(
                agent.master_seed,
                agent_choice_stream(stream, treatment_index(treatment)),
            )),
            (_, None) => None,
        };
        for t in TransferLevel::ALL {
            let Ok(table) = agent.partworths.table(t) else {
                // no model at this level: keep everything safe
                rows.push(row(
                    agent,
                    treatment,
                    t,
                    TokenSplit {
                        safe: BUDGET as u32,
                        ..Default::default()
                    },
                ));
                continue;
            };
            let ctx = Context::extrapolated(treatment, t);
            let (_, pr) = context_probabilities(&ctx, table, &agent.nccm)?;
            let budget = BUDGET as u32;
            let split = match rule {
                AllocationRule::ExpectedShare => expected_share(&pr, budget),
                AllocationRule::ArgmaxAllIn => argmax_all_in(&pr, budget),
                AllocationRule::MultinomialTokens => {
                    multinomial_tokens(&pr, budget, rng.as_mut().expect("seeded"))
                }
            };
            rows.push(row(agent, treatment, t, split));
        }
    }
    Ok(rows)
}

fn treatment_index(id: TreatmentId) -> u64 {
    TreatmentId::ALL
        .iter()
        .position(|x| *x == id)
        .expect("listed") as u64
}

/// Runs every agent through every treatment at all six transfers. Rows are
/// ordered by agent id, treatment (P, PI0, I0, PIneg, Ineg) and transfer.
///
/// `workers = 0` uses rayon's default pool size.
pub fn simulate_dataset(
    agents: &[AgentProfile],
    treatments: &[TreatmentId],
    rule: AllocationRule,
    workers: usize,
) -> Result<ChoiceDataset, SimulationError> {
    if treatments.is_empty() {
        return Err(SimulationError::NoTreatments);
    }
    let mut treatments = treatments.to_vec();
    treatments.sort();
    treatments.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimulationError::Pool(e.to_string()))?;
    let per_agent: Vec<Result<Vec<DatasetRow>, SimulationError>> = pool.install(|| {
        agents
            .par_iter()
            .map(|agent| simulate_agent(agent, &treatments, rule))
            .collect()
    });
    let mut rows = Vec::with_capacity(agents.len() * treatments.len() * 6);
    for chunk in per_agent {
        rows.extend(chunk?);
    }
    rows.sort_by_key(|r| (r.agent_id, r.treatment, r.transfer));
    Ok(ChoiceDataset { rows })
}

impl ChoiceDataset {
    /// Row-level and layout checks: tokens sum to 50, flags agree with
    /// spending, unavailable options unused, and each agent answers each
    /// of its treatments exactly once per transfer level.
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut seen: BTreeMap<(u32, TreatmentId), [bool; 6]> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            let line = i as u64 + 2;
            check_row(r, line)?;
            let slot = &mut seen.entry((r.agent_id, r.treatment)).or_default()[r.transfer.index()];
            if *slot {
                return Err(DatasetError::Field {
                    line,
                    field: "transfer",
                    detail: format!(
                        "duplicate transfer {} for agent {} in {}",
                        r.transfer, r.agent_id, r.treatment
                    ),
                });
            }
            *slot = true;
        }
        for ((agent, treatment), levels) in seen {
            if levels.iter().any(|x| !x) {
                return Err(DatasetError::Layout {
                    agent,
                    treatment,
                    detail: "needs one row for each transfer 0, 10, ..., 50".into(),
                });
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.agent_id.to_string(),
                r.treatment.to_string(),
                r.transfer.to_string(),
                r.deduction.to_string(),
                r.investment.to_string(),
                r.safe.to_string(),
                r.punisher.to_string(),
                r.investor.to_string(),
                r.risk_class.map(|c| c.to_string()).unwrap_or_default(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, DatasetError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses and validates a dataset in the CSV schema written by
    /// [`ChoiceDataset::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let found: Vec<&str> = header.iter().map(str::trim).collect();
        if found != CSV_HEADER {
            return Err(DatasetError::Header {
                expected: CSV_HEADER.join(","),
                found: found.join(","),
            });
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let get = |idx: usize| record.get(idx).unwrap_or("").trim();
            let bad = |field: &'static str, detail: String| DatasetError::Field {
                line,
                field,
                detail,
            };
            let int = |idx: usize| -> Result<u32, DatasetError> {
                get(idx)
                    .parse::<u32>()
                    .map_err(|e| bad(CSV_HEADER[idx], format!("`{}`: {e}", get(idx))))
            };
            let flag = |idx: usize| -> Result<bool, DatasetError> {
                match get(idx).to_ascii_lowercase().as_str() {
                    "true" | "1" => Ok(true),
                    "false" | "0" => Ok(false),
                    other => Err(bad(CSV_HEADER[idx], format!("`{other}` is not a boolean"))),
                }
            };
            let treatment = get(1)
                .parse::<TreatmentId>()
                .map_err(|e| bad("treatment", e.to_string()))?;
            let transfer = get(2)
                .parse::<i64>()
                .map_err(|e| e.to_string())
                .and_then(|t| TransferLevel::new(t).map_err(|e| e.to_string()))
                .map_err(|e| bad("transfer", e))?;
            let risk_class = match get(8) {
                "" => None,
                s => Some(
                    s.parse::<RiskAttitude>()
                        .map_err(|e| bad("risk_class", e))?,
                ),
            };
            let seed = get(9)
                .parse::<u64>()
                .map_err(|e| bad("seed", format!("`{}`: {e}", get(9))))?;
            let row = DatasetRow {
                agent_id: int(0)?,
                treatment,
                transfer,
                deduction: int(3)?,
                investment: int(4)?,
                safe: int(5)?,
                punisher: flag(6)?,
                investor: flag(7)?,
                risk_class,
                seed,
            };
            check_row(&row, line)?;
            rows.push(row);
        }
        let ds = ChoiceDataset { rows };
        ds.validate()?;
        Ok(ds)
    }

    pub fn treatments(&self) -> Vec<TreatmentId> {
        let mut out: Vec<TreatmentId> = self.rows.iter().map(|r| r.treatment).collect();
        out.sort();
        out.dedup();
        out
    }
}

fn check_row(r: &DatasetRow, line: u64) -> Result<(), DatasetError> {
    let bad = |field: &'static str, detail: String| DatasetError::Field {
        line,
        field,
        detail,
    };
    let total = r.deduction + r.investment + r.safe;
    if total != BUDGET as u32 {
        return Err(bad(
            "safe",
            format!("tokens sum to {total}, expected {BUDGET}"),
        ));
    }
    if r.punisher != (r.deduction >= 1) {
        return Err(bad(
            "punisher",
            format!("flag {} with deduction {}", r.punisher, r.deduction),
        ));
    }
    if r.investor != (r.investment >= 1) {
        return Err(bad(
            "investor",
            format!("flag {} with investment {}", r.investor, r.investment),
        ));
    }
    let tr = Treatment::new(r.treatment);
    if r.deduction > 0 && !tr.punishment_available {
        return Err(bad(
            "deduction",
            format!("punishment unavailable in {}", r.treatment),
        ));
    }
    if r.investment > 0 && !tr.investment_available {
        return Err(bad(
            "investment",
            format!("investment unavailable in {}", r.treatment),
        ));
    }
    Ok(())
}

/// Per-agent, per-treatment expenditures summarized over the six transfer
/// levels. Incidence arrays are indexed by transfer / 10.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentMeasures {
    pub agent_id: u32,
    pub treatment: TreatmentId,
    pub risk_class: Option<RiskAttitude>,
    pub mean_deduction: f64,
    pub median_deduction: f64,
    pub mean_investment: f64,
    pub median_investment: f64,
    pub mean_safe: f64,
    pub median_safe: f64,
    pub punisher: [bool; 6],
    pub investor: [bool; 6],
}

pub fn derive_measures(dataset: &ChoiceDataset) -> Result<Vec<AgentMeasures>, DatasetError> {
    dataset.validate()?;
    let mut groups: BTreeMap<(u32, TreatmentId), Vec<&DatasetRow>> = BTreeMap::new();
    for r in &dataset.rows {
        groups.entry((r.agent_id, r.treatment)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((agent_id, treatment), rows)| {
            let col = |f: fn(&DatasetRow) -> u32| -> Vec<f64> {
                rows.iter().map(|r| f(r) as f64).collect()
            };
            let deduction = col(|r| r.deduction);
            let investment = col(|r| r.investment);
            let safe = col(|r| r.safe);
            let mut punisher = [false; 6];
            let mut investor = [false; 6];
            for r in &rows {
                punisher[r.transfer.index()] = r.punisher;
                investor[r.transfer.index()] = r.investor;
            }
            AgentMeasures {
                agent_id,
                treatment,
                risk_class: rows[0].risk_class,
                mean_deduction: mean(&deduction),
                median_deduction: median(&deduction),
                mean_investment: mean(&investment),
                median_investment: median(&investment),
                mean_safe: mean(&safe),
                median_safe: median(&safe),
                punisher,
                investor,
            }
        })
        .collect())
}

/// Everything needed to reproduce a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub spec: PopulationSpec,
    pub treatments: Vec<TreatmentId>,
    pub rule: AllocationRule,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub stream_split: &'static str,
    pub fair_transfer: &'static str,
    pub code_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

impl RunManifest {
    pub fn new(
        spec: &PopulationSpec,
        treatments: &[TreatmentId],
        rule: AllocationRule,
        timestamp: bool,
    ) -> Self {
        let created_unix = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        RunManifest {
            spec: spec.clone(),
            treatments: treatments.to_vec(),
            rule,
            seed: spec.master_seed,
            rng_algorithm: crate::rng::ALGORITHM,
            stream_split: crate::rng::SPLIT_RULE,
            fair_transfer: if spec.schedule.include_fair_transfer {
                "extrapolated: zero psychological gaps at t = 50"
            } else {
                "not modeled: all 50 tokens safe at t = 50"
            },
            code_version: env!("CARGO_PKG_VERSION"),
            created_unix,
        }
    }
}
