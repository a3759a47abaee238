//! Normalized contextual concavity model (NCCM) with a multinomial logit
//! choice layer.
//!
//! Each option's deterministic utility in a context is a sum over the two
//! attributes (material payoff and psychological payoff) of
//!
//! ```text
//! (W_max - W_min)^(1 - c) * (W_j - W_min)^c
//! ```
//!
//! with the range taken over the options available in that context. The
//! extreme options get 0 or the full range regardless of `c`; only an
//! intermediate option benefits from concavity. This is what makes the
//! investment option a compromise when punishment is also on the menu.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{TransferLevel, Treatment, TreatmentId};
use crate::roots::{bisect, Bracket};

/// Concavity parameters closer than this to 0 or 1 are rejected.
pub const CONCAVITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NccmError {
    #[error("concavity parameter {name} = {value} must lie strictly inside (0, 1)")]
    Concavity { name: &'static str, value: f64 },
    #[error("logit scale b = {0} must be positive and finite")]
    Scale(f64),
    #[error("partworth ordering violated for {attribute} at t = {t}: {detail}")]
    Ordering {
        attribute: Attribute,
        t: i64,
        detail: String,
    },
    #[error("psychological gap {gap} grows from t = {from} to t = {to}")]
    GapIncreasing {
        gap: &'static str,
        from: i64,
        to: i64,
    },
    #[error("no partworth table for t = {0}")]
    MissingTransfer(i64),
    #[error("transfer level t = 50 requires explicit fair-transfer extrapolation")]
    FairTransfer,
    #[error("empty option set")]
    EmptyOptions,
    #[error("invalid schedule config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OptionKind {
    /// Punish the dictator.
    TP,
    /// Invest in the lottery.
    I,
    /// Keep tokens in the safe account.
    S,
}

impl OptionKind {
    pub const ALL: [OptionKind; 3] = [OptionKind::TP, OptionKind::I, OptionKind::S];

    pub fn as_str(self) -> &'static str {
        match self {
            OptionKind::TP => "TP",
            OptionKind::I => "I",
            OptionKind::S => "S",
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attribute {
    Material,
    Psychological,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::Material => "material",
            Attribute::Psychological => "psychological",
        })
    }
}

/// One value per option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerOption<T> {
    pub tp: T,
    pub i: T,
    pub s: T,
}

impl<T: Copy> PerOption<T> {
    pub fn new(tp: T, i: T, s: T) -> Self {
        PerOption { tp, i, s }
    }

    pub fn get(&self, kind: OptionKind) -> T {
        match kind {
            OptionKind::TP => self.tp,
            OptionKind::I => self.i,
            OptionKind::S => self.s,
        }
    }
}

/// Partworths of the three options on both attributes at one transfer
/// level. Shared by every treatment at that level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartworthTable {
    pub material: PerOption<f64>,
    pub psychological: PerOption<f64>,
}

impl PartworthTable {
    /// Material 0/25/50 and psychological 50/25/0 for TP/I/S.
    pub fn canonical() -> Self {
        PartworthTable {
            material: PerOption::new(0.0, 25.0, 50.0),
            psychological: PerOption::new(50.0, 25.0, 0.0),
        }
    }

    pub fn attribute(&self, attribute: Attribute) -> &PerOption<f64> {
        match attribute {
            Attribute::Material => &self.material,
            Attribute::Psychological => &self.psychological,
        }
    }

    /// Options sorted from best to worst on `attribute`. Ties keep the
    /// TP, I, S order.
    pub fn ranking(&self, attribute: Attribute) -> [OptionKind; 3] {
        let w = self.attribute(attribute);
        let mut kinds = OptionKind::ALL;
        kinds.sort_by(|a, b| w.get(*b).total_cmp(&w.get(*a)));
        kinds
    }

    /// Weak orderings: S ≥ I ≥ TP on material, TP ≥ I ≥ S on
    /// psychological. Reversals are errors; ties are allowed so that
    /// degenerate configurations stay representable.
    pub fn check_ordering(&self, t: TransferLevel) -> Result<(), NccmError> {
        let m = &self.material;
        let p = &self.psychological;
        let finite = [m.tp, m.i, m.s, p.tp, p.i, p.s]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(NccmError::Ordering {
                attribute: Attribute::Material,
                t: t.tokens(),
                detail: "non-finite partworth".into(),
            });
        }
        if !(m.s >= m.i && m.i >= m.tp) {
            return Err(NccmError::Ordering {
                attribute: Attribute::Material,
                t: t.tokens(),
                detail: format!("need S >= I >= TP, got S={} I={} TP={}", m.s, m.i, m.tp),
            });
        }
        if !(p.tp >= p.i && p.i >= p.s) {
            return Err(NccmError::Ordering {
                attribute: Attribute::Psychological,
                t: t.tokens(),
                detail: format!("need TP >= I >= S, got TP={} I={} S={}", p.tp, p.i, p.s),
            });
        }
        Ok(())
    }

    /// Strict orderings on both attributes.
    pub fn is_strictly_ordered(&self) -> bool {
        let m = &self.material;
        let p = &self.psychological;
        m.s > m.i && m.i > m.tp && p.tp > p.i && p.i > p.s
    }

    pub fn psych_gaps(&self) -> (f64, f64) {
        let p = &self.psychological;
        (p.tp - p.s, p.i - p.s)
    }
}

/// Treatment plus transfer level; fixes which options are on the menu.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Context {
    pub treatment: Treatment,
    pub t: TransferLevel,
}

impl Context {
    /// Contexts at `t = 50` are refused; see [`Context::extrapolated`].
    pub fn new(treatment: TreatmentId, t: TransferLevel) -> Result<Self, NccmError> {
        if t.tokens() > 40 {
            return Err(NccmError::FairTransfer);
        }
        Ok(Context {
            treatment: Treatment::new(treatment),
            t,
        })
    }

    /// Allows the fair transfer `t = 50`, where the model is extrapolated.
    pub fn extrapolated(treatment: TreatmentId, t: TransferLevel) -> Self {
        Context {
            treatment: Treatment::new(treatment),
            t,
        }
    }

    pub fn available(&self) -> Vec<OptionKind> {
        let mut out = Vec::with_capacity(3);
        if self.treatment.punishment_available {
            out.push(OptionKind::TP);
        }
        if self.treatment.investment_available {
            out.push(OptionKind::I);
        }
        out.push(OptionKind::S);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NccmParams {
    pub c_material: f64,
    pub c_psych: f64,
    pub b: f64,
}

impl NccmParams {
    pub fn new(c_material: f64, c_psych: f64, b: f64) -> Result<Self, NccmError> {
        check_concavity("c_material", c_material)?;
        check_concavity("c_psych", c_psych)?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(NccmError::Scale(b));
        }
        Ok(NccmParams {
            c_material,
            c_psych,
            b,
        })
    }

    /// Equal concavity on both attributes.
    pub fn shared(c: f64, b: f64) -> Result<Self, NccmError> {
        NccmParams::new(c, c, b)
    }

    pub fn validate(&self) -> Result<(), NccmError> {
        NccmParams::new(self.c_material, self.c_psych, self.b).map(|_| ())
    }

    fn concavity(&self, attribute: Attribute) -> f64 {
        match attribute {
            Attribute::Material => self.c_material,
            Attribute::Psychological => self.c_psych,
        }
    }
}

impl Default for NccmParams {
    /// `b = 0.05`, `c = 0.35` on both attributes.
    fn default() -> Self {
        NccmParams {
            c_material: 0.35,
            c_psych: 0.35,
            b: 0.05,
        }
    }
}

fn check_concavity(name: &'static str, value: f64) -> Result<(), NccmError> {
    if value > CONCAVITY_EPS && value < 1.0 - CONCAVITY_EPS {
        Ok(())
    } else {
        Err(NccmError::Concavity { name, value })
    }
}

/// Values keyed by the options available in a context, in TP, I, S order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionValues(pub Vec<(OptionKind, f64)>);

impl OptionValues {
    pub fn get(&self, kind: OptionKind) -> Option<f64> {
        self.0.iter().find(|(k, _)| *k == kind).map(|(_, v)| *v)
    }

    pub fn kinds(&self) -> Vec<OptionKind> {
        self.0.iter().map(|(k, _)| *k).collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.0.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

pub type DeterministicUtilities = OptionValues;
pub type ChoiceProbabilities = OptionValues;

/// Contribution of one option on one attribute.
fn attribute_term(value: f64, min: f64, max: f64, c: f64) -> f64 {
    let range = max - min;
    if range <= 0.0 || value <= min {
        0.0
    } else if value >= max {
        range
    } else {
        range.powf(1.0 - c) * (value - min).powf(c)
    }
}

pub fn deterministic_utilities(
    ctx: &Context,
    w: &PartworthTable,
    params: &NccmParams,
) -> Result<DeterministicUtilities, NccmError> {
    params.validate()?;
    w.check_ordering(ctx.t)?;
    let options = ctx.available();
    let mut out: Vec<(OptionKind, f64)> = options.iter().map(|k| (*k, 0.0)).collect();
    for attribute in [Attribute::Material, Attribute::Psychological] {
        let values = w.attribute(attribute);
        let (min, max) = options
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, k| {
                let v = values.get(*k);
                (acc.0.min(v), acc.1.max(v))
            });
        let c = params.concavity(attribute);
        for (kind, m) in out.iter_mut() {
            *m += attribute_term(values.get(*kind), min, max, c);
        }
    }
    Ok(OptionValues(out))
}

/// Multinomial logit over the available options, shifted by the maximum
/// utility before exponentiating.
pub fn choice_probabilities(
    utilities: &DeterministicUtilities,
    b: f64,
) -> Result<ChoiceProbabilities, NccmError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(NccmError::Scale(b));
    }
    if utilities.0.is_empty() {
        return Err(NccmError::EmptyOptions);
    }
    let top = utilities
        .0
        .iter()
        .map(|(_, m)| b * m)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = utilities
        .0
        .iter()
        .map(|(_, m)| (b * m - top).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(OptionValues(
        utilities
            .0
            .iter()
            .zip(weights)
            .map(|((k, _), w)| (*k, w / total))
            .collect(),
    ))
}

/// Utilities and probabilities for a context in one call.
pub fn context_probabilities(
    ctx: &Context,
    w: &PartworthTable,
    params: &NccmParams,
) -> Result<(DeterministicUtilities, ChoiceProbabilities), NccmError> {
    let m = deterministic_utilities(ctx, w, params)?;
    let pr = choice_probabilities(&m, params.b)?;
    Ok((m, pr))
}

/// `ln Pr(kind)` without forming the probability, so shares that round
/// to 0 or 1 keep their relative precision.
fn log_choice_probability(utilities: &OptionValues, b: f64, kind: OptionKind) -> f64 {
    let own = utilities.get(kind).expect("option on menu");
    let rest: f64 = utilities
        .0
        .iter()
        .filter(|(k, _)| *k != kind)
        .map(|(_, m)| (b * (m - own)).exp())
        .sum();
    -rest.ln_1p()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let top = a.max(b);
    top + ((a - top).exp() + (b - top).exp()).ln()
}

/// Both sides of the condition under which adding punishment raises the
/// investment share:
///
/// ```text
/// exp(b M_I[PI0] + b M_S[I0]) > exp(b M_I[I0] + b M_TP[PI0]) + exp(b M_I[I0] + b M_S[PI0])
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assumption3Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Log-space versions of the two sides, used for the comparison itself.
fn assumption3_logs(
    w: &PartworthTable,
    params: &NccmParams,
    t: TransferLevel,
) -> Result<(f64, f64), NccmError> {
    let full = deterministic_utilities(&Context::extrapolated(TreatmentId::PI0, t), w, params)?;
    let inv = deterministic_utilities(&Context::extrapolated(TreatmentId::I0, t), w, params)?;
    let b = params.b;
    let m = |vals: &OptionValues, k| vals.get(k).expect("option on menu");
    let log_lhs = b * m(&full, OptionKind::I) + b * m(&inv, OptionKind::S);
    let log_rhs = log_sum_exp(
        b * m(&inv, OptionKind::I) + b * m(&full, OptionKind::TP),
        b * m(&inv, OptionKind::I) + b * m(&full, OptionKind::S),
    );
    Ok((log_lhs, log_rhs))
}

pub fn assumption3_check(
    w: &PartworthTable,
    params: &NccmParams,
    t: TransferLevel,
) -> Result<Assumption3Check, NccmError> {
    let (log_lhs, log_rhs) = assumption3_logs(w, params, t)?;
    Ok(Assumption3Check {
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        holds: log_lhs > log_rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Crossing {
    At(f64),
    NoCrossing,
}

/// Shared concavity `c = c_M = c_P` at which both sides of the
/// investment-share condition are equal, by bisection on (0, 1).
pub fn assumption3_crossing(w: &PartworthTable, b: f64, tol: f64) -> Result<Crossing, NccmError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(NccmError::Scale(b));
    }
    w.check_ordering(TransferLevel::ALL[0])?;
    let t = TransferLevel::ALL[0];
    let lo = 2.0 * CONCAVITY_EPS;
    let hi = 1.0 - 2.0 * CONCAVITY_EPS;
    let gap = |c: f64| {
        let params = NccmParams {
            c_material: c,
            c_psych: c,
            b,
        };
        let (l, r) = assumption3_logs(w, &params, t).expect("validated above");
        l - r
    };
    Ok(match bisect(gap, lo, hi, tol) {
        Bracket::Root(c) => Crossing::At(c),
        Bracket::NoSignChange => Crossing::NoCrossing,
    })
}

/// Partworth tables for each transfer level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartworthSchedule {
    pub tables: BTreeMap<TransferLevel, PartworthTable>,
    /// True when the table at `t = 50` is an extrapolation.
    pub extrapolated_fair: bool,
}

impl PartworthSchedule {
    /// The same table at every unequal transfer level.
    pub fn constant(table: PartworthTable) -> Self {
        PartworthSchedule {
            tables: TransferLevel::UNEQUAL.iter().map(|t| (*t, table)).collect(),
            extrapolated_fair: false,
        }
    }

    pub fn table(&self, t: TransferLevel) -> Result<&PartworthTable, NccmError> {
        self.tables
            .get(&t)
            .ok_or(NccmError::MissingTransfer(t.tokens()))
    }

    /// Checks the attribute orderings at every level, the constant material
    /// partworths, and weakly shrinking psychological gaps over the unequal
    /// transfers.
    pub fn check_assumptions(&self, strict: bool) -> Result<(), NccmError> {
        let mut prev: Option<(TransferLevel, &PartworthTable)> = None;
        for (t, table) in &self.tables {
            table.check_ordering(*t)?;
            if strict && t.tokens() <= 40 && !table.is_strictly_ordered() {
                return Err(NccmError::Ordering {
                    attribute: Attribute::Psychological,
                    t: t.tokens(),
                    detail: "strict ordering required".into(),
                });
            }
            if let Some((pt, prev_table)) = prev {
                if prev_table.material != table.material {
                    return Err(NccmError::Ordering {
                        attribute: Attribute::Material,
                        t: t.tokens(),
                        detail: "material partworths must not vary with t".into(),
                    });
                }
                let (a0, b0) = prev_table.psych_gaps();
                let (a1, b1) = table.psych_gaps();
                if a1 > a0 {
                    return Err(NccmError::GapIncreasing {
                        gap: "TP-S",
                        from: pt.tokens(),
                        to: t.tokens(),
                    });
                }
                if b1 > b0 {
                    return Err(NccmError::GapIncreasing {
                        gap: "I-S",
                        from: pt.tokens(),
                        to: t.tokens(),
                    });
                }
            }
            prev = Some((*t, table));
        }
        Ok(())
    }
}

/// How psychological gaps shrink as the transfer becomes fairer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapDecay {
    /// Gaps scaled by `1 - t/50`.
    Linear,
    /// Explicit scale factors for t = 0, 10, 20, 30, 40.
    Factors(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub material: PerOption<f64>,
    /// Psychological partworths at `t = 0`.
    pub psych_base: PerOption<f64>,
    pub decay: GapDecay,
    /// Adds a `t = 50` table with zero psychological gaps.
    #[serde(default)]
    pub include_fair_transfer: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let canonical = PartworthTable::canonical();
        ScheduleConfig {
            material: canonical.material,
            psych_base: canonical.psychological,
            decay: GapDecay::Linear,
            include_fair_transfer: false,
        }
    }
}

pub fn build_partworth_schedule(config: &ScheduleConfig) -> Result<PartworthSchedule, NccmError> {
    let factors: Vec<f64> = match &config.decay {
        GapDecay::Linear => TransferLevel::UNEQUAL
            .iter()
            .map(|t| 1.0 - t.tokens() as f64 / 50.0)
            .collect(),
        GapDecay::Factors(f) => {
            if f.len() != TransferLevel::UNEQUAL.len() {
                return Err(NccmError::Config(format!(
                    "expected 5 decay factors, got {}",
                    f.len()
                )));
            }
            if f.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(NccmError::Config("decay factors must be positive".into()));
            }
            if f.windows(2).any(|w| w[1] > w[0]) {
                return Err(NccmError::Config(
                    "decay factors must be weakly decreasing in t".into(),
                ));
            }
            f.clone()
        }
    };
    let base = config.psych_base;
    let at = |factor: f64| PartworthTable {
        material: config.material,
        psychological: PerOption::new(
            base.s + (base.tp - base.s) * factor,
            base.s + (base.i - base.s) * factor,
            base.s,
        ),
    };
    let mut tables = BTreeMap::new();
    for (t, factor) in TransferLevel::UNEQUAL.iter().zip(&factors) {
        tables.insert(*t, at(*factor));
    }
    if config.include_fair_transfer {
        tables.insert(TransferLevel::ALL[5], at(0.0));
    }
    let schedule = PartworthSchedule {
        tables,
        extrapolated_fair: config.include_fair_transfer,
    };
    schedule.check_assumptions(true)?;
    Ok(schedule)
}

/// One context comparison for the punishment-share result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop1Row {
    pub t: TransferLevel,
    pub pr_tp_full: f64,
    pub pr_tp_punish_only: f64,
    /// `ln Pr(TP | P) - ln Pr(TP | PI0)`; decides `holds`, since both
    /// shares can round to the same double.
    pub log_ratio: f64,
    pub m_tp_equal: bool,
    pub m_s_equal: bool,
    pub exp_m_i_positive: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub rows: Vec<Prop1Row>,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks that adding the investment option lowers the punishment share:
/// Pr(TP | PI0, t) < Pr(TP | P, t), along with the intermediate facts the
/// argument rests on.
pub fn verify_proposition1(
    schedule: &PartworthSchedule,
    params: &NccmParams,
    t_set: &[TransferLevel],
) -> Result<Prop1Report, NccmError> {
    params.validate()?;
    schedule.check_assumptions(false)?;
    let mut rows = Vec::with_capacity(t_set.len());
    for &t in t_set {
        let w = schedule.table(t)?;
        let (m_full, pr_full) =
            context_probabilities(&Context::extrapolated(TreatmentId::PI0, t), w, params)?;
        let (m_p, pr_p) =
            context_probabilities(&Context::extrapolated(TreatmentId::P, t), w, params)?;
        let get = |v: &OptionValues, k| v.get(k).expect("option on menu");
        let m_tp_equal = get(&m_full, OptionKind::TP) == get(&m_p, OptionKind::TP);
        let m_s_equal = get(&m_full, OptionKind::S) == get(&m_p, OptionKind::S);
        let exp_m_i_positive = (params.b * get(&m_full, OptionKind::I)).exp() > 0.0;
        let pr_tp_full = get(&pr_full, OptionKind::TP);
        let pr_tp_punish_only = get(&pr_p, OptionKind::TP);
        let b = params.b;
        let log_ratio = if m_tp_equal && m_s_equal {
            // same TP and S terms: the denominators differ by exp(b M_I) alone
            let lse_p = log_sum_exp(b * get(&m_p, OptionKind::TP), b * get(&m_p, OptionKind::S));
            (b * get(&m_full, OptionKind::I) - lse_p).exp().ln_1p()
        } else {
            log_choice_probability(&m_p, b, OptionKind::TP)
                - log_choice_probability(&m_full, b, OptionKind::TP)
        };
        rows.push(Prop1Row {
            t,
            pr_tp_full,
            pr_tp_punish_only,
            log_ratio,
            m_tp_equal,
            m_s_equal,
            exp_m_i_positive,
            holds: m_tp_equal && m_s_equal && exp_m_i_positive && log_ratio > 0.0,
        });
    }
    Ok(Prop1Report { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop2Row {
    pub t: TransferLevel,
    pub assumption3: Assumption3Check,
    pub pr_i_full: f64,
    pub pr_i_invest_only: f64,
    /// `ln Pr(I | PI0) - ln Pr(I | I0)`; decides `inequality_holds`.
    pub log_ratio: f64,
    /// The inequality is only claimed where the condition holds.
    pub asserted: bool,
    pub inequality_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Report {
    pub rows: Vec<Prop2Row>,
}

impl Prop2Report {
    pub fn violations(&self) -> Vec<&Prop2Row> {
        self.rows
            .iter()
            .filter(|r| r.asserted && !r.inequality_holds)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Compares Pr(I | PI0, t) with Pr(I | I0, t), asserting the increase
/// only where the investment-share condition holds.
pub fn verify_proposition2(
    schedule: &PartworthSchedule,
    params: &NccmParams,
    t_set: &[TransferLevel],
) -> Result<Prop2Report, NccmError> {
    params.validate()?;
    let mut rows = Vec::with_capacity(t_set.len());
    for &t in t_set {
        let w = schedule.table(t)?;
        let a3 = assumption3_check(w, params, t)?;
        let (m_full, pr_full) =
            context_probabilities(&Context::extrapolated(TreatmentId::PI0, t), w, params)?;
        let (m_inv, pr_inv) =
            context_probabilities(&Context::extrapolated(TreatmentId::I0, t), w, params)?;
        let pr_i_full = pr_full.get(OptionKind::I).expect("on menu");
        let pr_i_invest_only = pr_inv.get(OptionKind::I).expect("on menu");
        let log_ratio = log_choice_probability(&m_full, params.b, OptionKind::I)
            - log_choice_probability(&m_inv, params.b, OptionKind::I);
        rows.push(Prop2Row {
            t,
            assumption3: a3,
            pr_i_full,
            pr_i_invest_only,
            log_ratio,
            asserted: a3.holds,
            inequality_holds: log_ratio > 0.0,
        });
    }
    Ok(Prop2Report { rows })
}

/// Draws a partworth schedule and parameters satisfying the strict
/// attribute orderings, constant material partworths, and shrinking
/// psychological gaps. Concavities are uniform on (0.01, 0.99) and the
/// logit scale on (0.001, 1).
pub fn random_valid_model<R: Rng + ?Sized>(rng: &mut R) -> (PartworthSchedule, NccmParams) {
    fn sorted3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
        loop {
            let mut v = [
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..100.0),
            ];
            v.sort_by(f64::total_cmp);
            if v[0] < v[1] && v[1] < v[2] {
                return v;
            }
        }
    }
    let m = sorted3(rng);
    let p = sorted3(rng);
    let mut factors: Vec<f64> = (0..5).map(|_| rng.gen_range(0.05..=1.0)).collect();
    factors.sort_by(|a, b| b.total_cmp(a));
    let config = ScheduleConfig {
        material: PerOption::new(m[0], m[1], m[2]),
        psych_base: PerOption::new(p[2], p[1], p[0]),
        decay: GapDecay::Factors(factors),
        include_fair_transfer: false,
    };
    let schedule = build_partworth_schedule(&config).expect("sampled config is valid");
    let params = NccmParams {
        c_material: rng.gen_range(0.01..0.99),
        c_psych: rng.gen_range(0.01..0.99),
        b: rng.gen_range(0.001..1.0),
    };
    (schedule, params)
}

/// Outcome of a randomized sweep of both proposition checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PropositionSweep {
    pub draws: usize,
    pub comparisons: usize,
    pub prop1_failures: usize,
    pub prop2_asserted: usize,
    pub prop2_failures: usize,
    pub prop2_unasserted: usize,
    pub prop2_unasserted_reversals: usize,
}

impl PropositionSweep {
    pub fn passed(&self) -> bool {
        self.prop1_failures == 0 && self.prop2_failures == 0
    }

    fn merge(mut self, other: PropositionSweep) -> Self {
        self.draws += other.draws;
        self.comparisons += other.comparisons;
        self.prop1_failures += other.prop1_failures;
        self.prop2_asserted += other.prop2_asserted;
        self.prop2_failures += other.prop2_failures;
        self.prop2_unasserted += other.prop2_unasserted;
        self.prop2_unasserted_reversals += other.prop2_unasserted_reversals;
        self
    }
}

/// Runs `draws` random models (draw `i` on seed stream `i`) through both
/// proposition checks at every unequal transfer level.
pub fn proposition_sweep(draws: usize, master_seed: u64) -> PropositionSweep {
    (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::stream_rng(master_seed, i as u64);
            let (schedule, params) = random_valid_model(&mut rng);
            let p1 = verify_proposition1(&schedule, &params, &TransferLevel::UNEQUAL)
                .expect("valid draw");
            let p2 = verify_proposition2(&schedule, &params, &TransferLevel::UNEQUAL)
                .expect("valid draw");
            let mut s = PropositionSweep {
                draws: 1,
                comparisons: p1.rows.len(),
                prop1_failures: p1.rows.iter().filter(|r| !r.holds).count(),
                ..Default::default()
            };
            for row in &p2.rows {
                if row.asserted {
                    s.prop2_asserted += 1;
                    if !row.inequality_holds {
                        s.prop2_failures += 1;
                    }
                } else {
                    s.prop2_unasserted += 1;
                    if !row.inequality_holds {
                        s.prop2_unasserted_reversals += 1;
                    }
                }
            }
            s
        })
        .reduce(PropositionSweep::default, PropositionSweep::merge)
}

/// One column of the assumption simulation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableB1Row {
    pub c: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of the investment-share condition for each shared concavity
/// in `cs`, at `t = 0`.
pub fn table_b1(w: &PartworthTable, b: f64, cs: &[f64]) -> Result<Vec<TableB1Row>, NccmError> {
    cs.iter()
        .map(|&c| {
            let params = NccmParams::shared(c, b)?;
            let check = assumption3_check(w, &params, TransferLevel::ALL[0])?;
            Ok(TableB1Row {
                c,
                lhs: check.lhs,
                rhs: check.rhs,
                holds: check.holds,
            })
        })
        .collect()
}

/// Plain-text table with one column per concavity value.
pub fn format_table_b1(rows: &[TableB1Row], precision: usize) -> String {
    let width = rows
        .iter()
        .map(|r| format!("{:.*}", precision, r.lhs.max(r.rhs)).len())
        .max()
        .unwrap_or(4)
        .max(6);
    let mut out = format!("{:<10}", "c_M = c_P");
    for r in rows {
        out.push_str(&format!(" {:>width$}", r.c));
    }
    out.push('\n');
    for (label, pick) in [("LHS", true), ("RHS", false)] {
        out.push_str(&format!("{label:<10}"));
        for r in rows {
            let v = if pick { r.lhs } else { r.rhs };
            out.push_str(&format!(" {:>width$.*}", precision, v));
        }
        out.push('\n');
    }
    out
}

/// One record of a parameter sweep: a context's utilities and
/// probabilities together with the investment-share condition at that `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub c_material: f64,
    pub c_psych: f64,
    pub b: f64,
    pub t: TransferLevel,
    pub context: TreatmentId,
    pub utilities: BTreeMap<String, f64>,
    pub probabilities: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Records for every (params, t, context) combination in input order.
pub fn sweep_records(
    schedule: &PartworthSchedule,
    params_list: &[NccmParams],
    t_set: &[TransferLevel],
) -> Result<Vec<SweepRecord>, NccmError> {
    let per_params: Vec<Result<Vec<SweepRecord>, NccmError>> = params_list
        .par_iter()
        .map(|params| {
            let mut out = Vec::new();
            for &t in t_set {
                let w = schedule.table(t)?;
                let a3 = assumption3_check(w, params, t)?;
                for context in [TreatmentId::P, TreatmentId::PI0, TreatmentId::I0] {
                    let (m, pr) =
                        context_probabilities(&Context::extrapolated(context, t), w, params)?;
                    out.push(SweepRecord {
                        c_material: params.c_material,
                        c_psych: params.c_psych,
                        b: params.b,
                        t,
                        context,
                        utilities: m.to_map(),
                        probabilities: pr.to_map(),
                        lhs: a3.lhs,
                        rhs: a3.rhs,
                        holds: a3.holds,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for chunk in per_params {
        all.extend(chunk?);
    }
    Ok(all)
}
