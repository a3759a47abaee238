//! Nonparametric tests and summary tables.
//!
//! Two-sided conventions: the rank-sum test doubles the smaller tail (capped
//! at 1) and its normal approximation uses a continuity correction; Fisher's
//! test sums every table no more likely than the observed one.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::game::TreatmentId;
use crate::simulate::{derive_measures, AgentMeasures, ChoiceDataset, DatasetError};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample `{0}` is empty")]
    EmptySample(&'static str),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("all-zero contingency table")]
    EmptyTable,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Midpoint of the two central values for even counts.
pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RankSumMethod {
    /// Exact when the combined sample size is at most 12.
    #[default]
    Auto,
    Exact,
    NormalApprox,
}

pub const EXACT_MAX_COMBINED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSumResult {
    /// Mann-Whitney U of the first sample: its rank sum minus n(n+1)/2.
    pub u_statistic: f64,
    pub p_two_sided: f64,
    pub method: RankSumMethod,
}

/// Doubled midranks, so tied ranks stay integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

pub fn wilcoxon_rank_sum(
    x: &[f64],
    y: &[f64],
    method: RankSumMethod,
) -> Result<RankSumResult, StatsError> {
    if x.is_empty() {
        return Err(StatsError::EmptySample("x"));
    }
    if y.is_empty() {
        return Err(StatsError::EmptySample("y"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = x.len();
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let w2: u64 = ranks[..n].iter().sum();
    let u_statistic = w2 as f64 / 2.0 - (n * (n + 1)) as f64 / 2.0;

    let method = match method {
        RankSumMethod::Auto if pooled.len() <= EXACT_MAX_COMBINED => RankSumMethod::Exact,
        RankSumMethod::Auto => RankSumMethod::NormalApprox,
        m => m,
    };
    let (lower, upper) = match method {
        RankSumMethod::Exact => exact_tails(&ranks, n, w2),
        _ => normal_tails(&pooled, n, w2),
    };
    Ok(RankSumResult {
        u_statistic,
        p_two_sided: (2.0 * lower.min(upper)).min(1.0),
        method,
    })
}

/// P(W <= w) and P(W >= w) over all C(N, n) ways to pick the first
/// sample's ranks, counted by subset-sum dynamic programming.
fn exact_tails(ranks: &[u64], n: usize, w2: u64) -> (f64, f64) {
    let total: u64 = ranks.iter().sum();
    let max_sum = total as usize;
    // ways[k][s]: number of k-subsets of the ranks seen so far with sum s
    let mut ways = vec![vec![0f64; max_sum + 1]; n + 1];
    ways[0][0] = 1.0;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n).rev() {
            let (lo, hi) = ways.split_at_mut(k);
            let prev = &lo[k - 1];
            let cur = &mut hi[0];
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let counts = &ways[n];
    let all: f64 = counts.iter().sum();
    let w = w2 as usize;
    let lower: f64 = counts[..=w].iter().sum();
    let upper: f64 = counts[w..].iter().sum();
    (lower / all, upper / all)
}

fn normal_tails(pooled: &[f64], n: usize, w2: u64) -> (f64, f64) {
    let big_n = pooled.len() as f64;
    let (nf, mf) = (n as f64, big_n - n as f64);
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if var.is_nan() || var <= 0.0 {
        return (1.0, 1.0);
    }
    let sd = var.sqrt();
    let mu = nf * (big_n + 1.0) / 2.0;
    let w = w2 as f64 / 2.0;
    let lower = normal_cdf((w - mu + 0.5) / sd);
    let upper = normal_cdf(-(w - mu - 0.5) / sd);
    (lower.min(1.0), upper.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherResult {
    pub p_two_sided: f64,
}

/// Table `[[a, b], [c, d]]`.
pub fn fisher_exact_2x2(a: u64, b: u64, c: u64, d: u64) -> Result<FisherResult, StatsError> {
    let n = a + b + c + d;
    if n == 0 {
        return Err(StatsError::EmptyTable);
    }
    let (r1, c1) = (a + b, a + c);
    let ln_c = |n: u64, k: u64| ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let denom = ln_c(n, c1);
    let prob = |x: u64| (ln_c(r1, x) + ln_c(n - r1, c1 - x) - denom).exp();
    let lo = c1.saturating_sub(n - r1);
    let hi = r1.min(c1);
    let observed = prob(a);
    let cutoff = observed * (1.0 + 1e-7);
    let p: f64 = (lo..=hi).map(prob).filter(|q| *q <= cutoff).sum();
    Ok(FisherResult {
        p_two_sided: p.clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    MeanPunishment,
    MedianPunishment,
    MeanInvestment,
    MedianInvestment,
    MeanSafe,
    MedianSafe,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::MeanPunishment,
        Measure::MedianPunishment,
        Measure::MeanInvestment,
        Measure::MedianInvestment,
        Measure::MeanSafe,
        Measure::MedianSafe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::MeanPunishment => "mean_punishment",
            Measure::MedianPunishment => "median_punishment",
            Measure::MeanInvestment => "mean_investment",
            Measure::MedianInvestment => "median_investment",
            Measure::MeanSafe => "mean_safe",
            Measure::MedianSafe => "median_safe",
        }
    }

    pub fn of(self, m: &AgentMeasures) -> f64 {
        match self {
            Measure::MeanPunishment => m.mean_deduction,
            Measure::MedianPunishment => m.median_deduction,
            Measure::MeanInvestment => m.mean_investment,
            Measure::MedianInvestment => m.median_investment,
            Measure::MeanSafe => m.mean_safe,
            Measure::MedianSafe => m.median_safe,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub treatment: TreatmentId,
    pub measure: Measure,
    pub average: f64,
    /// Sample standard deviation; 0 when `n == 1`.
    pub sd: f64,
    pub n: usize,
    pub single_observation: bool,
}

fn group_measures(measures: &[AgentMeasures]) -> BTreeMap<TreatmentId, Vec<&AgentMeasures>> {
    let mut out: BTreeMap<TreatmentId, Vec<&AgentMeasures>> = BTreeMap::new();
    for m in measures {
        out.entry(m.treatment).or_default().push(m);
    }
    out
}

pub fn summarize_measures(measures: &[AgentMeasures]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (treatment, group) in group_measures(measures) {
        for measure in Measure::ALL {
            let xs: Vec<f64> = group.iter().map(|m| measure.of(m)).collect();
            rows.push(SummaryRow {
                treatment,
                measure,
                average: mean(&xs),
                sd: sample_sd(&xs),
                n: xs.len(),
                single_observation: xs.len() == 1,
            });
        }
    }
    rows
}

pub fn summarize(dataset: &ChoiceDataset) -> Result<Vec<SummaryRow>, StatsError> {
    Ok(summarize_measures(&derive_measures(dataset)?))
}

pub fn format_summary(rows: &[SummaryRow], precision: usize) -> String {
    let mut out = format!(
        "{:<8} {:<18} {:>12} {:>12} {:>6}\n",
        "treat", "measure", "average", "sd", "n"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:<18} {:>12.p$} {:>12.p$} {:>6}{}\n",
            r.treatment.as_str(),
            r.measure.as_str(),
            r.average,
            r.sd,
            r.n,
            if r.single_observation { " (n=1)" } else { "" },
            p = precision
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: &'static str,
    pub groups: [TreatmentId; 2],
    pub measure: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<i64>,
    pub statistic: f64,
    pub p: f64,
    pub method: String,
}

/// Rank-sum comparisons on per-agent measures and Fisher tests on
/// punisher / investor incidence at each transfer level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub agents: usize,
    pub summary: Vec<SummaryRow>,
    pub tests: Vec<TestReport>,
}

impl AnalysisReport {
    pub fn average(&self, treatment: TreatmentId, measure: Measure) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.treatment == treatment && r.measure == measure)
            .map(|r| r.average)
    }
}

const PUNISH_PAIRS: [(TreatmentId, TreatmentId); 2] = [
    (TreatmentId::PI0, TreatmentId::P),
    (TreatmentId::PIneg, TreatmentId::P),
];
const INVEST_PAIRS: [(TreatmentId, TreatmentId); 2] = [
    (TreatmentId::PI0, TreatmentId::I0),
    (TreatmentId::PIneg, TreatmentId::Ineg),
];

pub fn analyze(
    dataset: &ChoiceDataset,
    method: RankSumMethod,
) -> Result<AnalysisReport, StatsError> {
    let measures = derive_measures(dataset)?;
    let groups = group_measures(&measures);
    let mut tests = Vec::new();
    let pairs = PUNISH_PAIRS
        .iter()
        .map(|p| {
            (
                p,
                [Measure::MeanPunishment, Measure::MedianPunishment],
                true,
            )
        })
        .chain(INVEST_PAIRS.iter().map(|p| {
            (
                p,
                [Measure::MeanInvestment, Measure::MedianInvestment],
                false,
            )
        }));
    for (&(a, b), ms, punish) in pairs {
        let (Some(ga), Some(gb)) = (groups.get(&a), groups.get(&b)) else {
            continue;
        };
        for measure in ms {
            let xa: Vec<f64> = ga.iter().map(|m| measure.of(m)).collect();
            let xb: Vec<f64> = gb.iter().map(|m| measure.of(m)).collect();
            let r = wilcoxon_rank_sum(&xa, &xb, method)?;
            tests.push(TestReport {
                test: "wilcoxon_rank_sum",
                groups: [a, b],
                measure: measure.as_str().into(),
                transfer: None,
                statistic: r.u_statistic,
                p: r.p_two_sided,
                method: format!("{:?}", r.method),
            });
        }
        for t in 0..6 {
            let count = |g: &[&AgentMeasures]| {
                let yes = g
                    .iter()
                    .filter(|m| if punish { m.punisher[t] } else { m.investor[t] })
                    .count() as u64;
                (yes, g.len() as u64 - yes)
            };
            let (ya, na) = count(ga);
            let (yb, nb) = count(gb);
            let r = fisher_exact_2x2(ya, na, yb, nb)?;
            tests.push(TestReport {
                test: "fisher_exact",
                groups: [a, b],
                measure: if punish { "punisher" } else { "investor" }.into(),
                transfer: Some(10 * t as i64),
                statistic: ya as f64 / (ya + na) as f64 - yb as f64 / (yb + nb) as f64,
                p: r.p_two_sided,
                method: "Exact".into(),
            });
        }
    }
    let agents = measures
        .iter()
        .map(|m| m.agent_id)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(AnalysisReport {
        agents,
        summary: summarize_measures(&measures),
        tests,
    })
}

pub fn format_tests(tests: &[TestReport], precision: usize) -> String {
    let mut out = String::new();
    for r in tests {
        let at = r.transfer.map(|t| format!(" t={t}")).unwrap_or_default();
        out.push_str(&format!(
            "{} {} vs {} {}{}: stat={:.p$} p={:.p$} ({})\n",
            r.test,
            r.groups[0],
            r.groups[1],
            r.measure,
            at,
            r.statistic,
            r.p,
            r.method,
            p = precision
        ));
    }
    out
}
