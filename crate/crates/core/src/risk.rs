//! Holt–Laury style risk elicitation: ten paired lotteries, switch-point
//! classification, and the CRRA coefficient interval implied by a switch
//! point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{bisect, Bracket};

pub const QUESTIONS: usize = 10;

const L_HIGH: i64 = 3750;
const L_LOW: i64 = 3550;
const R_HIGH: i64 = 8000;
const R_LOW: i64 = 100;

/// Bracket searched for indifference roots.
pub const CRRA_SEARCH: (f64, f64) = (-10.0, 10.0);
pub const CRRA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RiskError {
    #[error("question must be in 1..=10, got {0}")]
    QuestionOutOfRange(i64),
    #[error("switch point must be in 1..=10, got {0}")]
    SwitchPointOutOfRange(i64),
    #[error("choice vector needs exactly 10 picks, got {0}")]
    WrongLength(usize),
    #[error("invalid pick `{0}`, expected L or R")]
    InvalidPick(char),
}

/// One row of the lottery table. Payoffs in KRW; the high payoff of each
/// lottery comes with probability `question / 10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LotteryPair {
    pub question: u8,
    pub left: (i64, i64),
    pub right: (i64, i64),
}

impl LotteryPair {
    pub fn new(question: i64) -> Result<Self, RiskError> {
        if !(1..=QUESTIONS as i64).contains(&question) {
            return Err(RiskError::QuestionOutOfRange(question));
        }
        Ok(LotteryPair {
            question: question as u8,
            left: (L_HIGH, L_LOW),
            right: (R_HIGH, R_LOW),
        })
    }

    pub fn high_probability(&self) -> f64 {
        self.question as f64 / 10.0
    }

    /// Expected-value gap E(L) − E(R), exact in KRW.
    pub fn ev_gap(&self) -> i64 {
        let q = self.question as i64;
        let tenfold = q * (self.left.0 - self.right.0) + (10 - q) * (self.left.1 - self.right.1);
        debug_assert_eq!(tenfold % 10, 0);
        tenfold / 10
    }
}

pub fn lottery_table() -> Vec<LotteryPair> {
    (1..=QUESTIONS as i64)
        .map(|q| LotteryPair::new(q).expect("static range"))
        .collect()
}

pub fn lottery_ev_gap(question: i64) -> Result<i64, RiskError> {
    Ok(LotteryPair::new(question)?.ev_gap())
}

/// CSV rendering of the lottery table.
pub fn lottery_table_csv() -> String {
    let mut out = String::from("question,pL_high,L_high,L_low,R_high,R_low,ev_gap\n");
    for pair in lottery_table() {
        out.push_str(&format!(
            "{},{:.1},{},{},{},{},{}\n",
            pair.question,
            pair.high_probability(),
            pair.left.0,
            pair.left.1,
            pair.right.0,
            pair.right.1,
            pair.ev_gap()
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pick {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChoiceVector(pub [Pick; QUESTIONS]);

impl ChoiceVector {
    pub fn from_picks(picks: &[Pick]) -> Result<Self, RiskError> {
        let arr: [Pick; QUESTIONS] = picks
            .try_into()
            .map_err(|_| RiskError::WrongLength(picks.len()))?;
        Ok(ChoiceVector(arr))
    }
}

impl FromStr for ChoiceVector {
    type Err = RiskError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let picks = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'L' | 'A' => Ok(Pick::L),
                'R' | 'B' => Ok(Pick::R),
                other => Err(RiskError::InvalidPick(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ChoiceVector::from_picks(&picks)
    }
}

impl fmt::Display for ChoiceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.0 {
            f.write_str(match p {
                Pick::L => "L",
                Pick::R => "R",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskAttitude {
    Neutral,
    Averse,
    Loving,
    Inconsistent,
}

impl RiskAttitude {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskAttitude::Neutral => "neutral",
            RiskAttitude::Averse => "averse",
            RiskAttitude::Loving => "loving",
            RiskAttitude::Inconsistent => "inconsistent",
        }
    }
}

impl fmt::Display for RiskAttitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskAttitude {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "neutral" => Ok(RiskAttitude::Neutral),
            "averse" => Ok(RiskAttitude::Averse),
            "loving" => Ok(RiskAttitude::Loving),
            "inconsistent" => Ok(RiskAttitude::Inconsistent),
            _ => Err(format!("unknown risk class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskClass {
    pub attitude: RiskAttitude,
    /// First question answered with R; absent iff inconsistent.
    pub switch_point: Option<u8>,
}

/// Classifies a choice vector by its switch point.
///
/// A vector is inconsistent when it ever returns from R to L, or never
/// reaches R at all.
pub fn classify_risk(choices: &ChoiceVector) -> RiskClass {
    let inconsistent = RiskClass {
        attitude: RiskAttitude::Inconsistent,
        switch_point: None,
    };
    let picks = &choices.0;
    let Some(first_r) = picks.iter().position(|p| *p == Pick::R) else {
        return inconsistent;
    };
    if picks[first_r..].contains(&Pick::L) {
        return inconsistent;
    }
    let switch_point = first_r as u8 + 1;
    let attitude = match switch_point.cmp(&5) {
        std::cmp::Ordering::Equal => RiskAttitude::Neutral,
        std::cmp::Ordering::Greater => RiskAttitude::Averse,
        std::cmp::Ordering::Less => RiskAttitude::Loving,
    };
    RiskClass {
        attitude,
        switch_point: Some(switch_point),
    }
}

/// CRRA utility of wealth `w`, shifted so that it is continuous through
/// `r = 1`: `(w^(1-r) - 1) / (1 - r)`, and `ln w` at `r = 1`.
///
/// The shift is common to both lotteries, so preference comparisons are
/// those of `w^(1-r) / (1-r)`.
pub fn crra_utility(w: f64, r: f64) -> f64 {
    let k = 1.0 - r;
    if k.abs() < 1e-12 {
        w.ln()
    } else {
        (k * w.ln()).exp_m1() / k
    }
}

/// E[u(L)] − E[u(R)] at question `q` for CRRA coefficient `r`.
///
/// Wealth is measured in units of the smallest payoff (100 KRW). Ordering
/// is scale invariant under CRRA and the rescale keeps every utility term
/// well conditioned across the whole search bracket.
pub fn crra_preference_gap(q: u8, r: f64) -> f64 {
    let p = q as f64 / 10.0;
    let unit = R_LOW as f64;
    let u = |krw: i64| crra_utility(krw as f64 / unit, r);
    p * u(L_HIGH) + (1.0 - p) * u(L_LOW) - p * u(R_HIGH) - (1.0 - p) * u(R_LOW)
}

/// CRRA coefficient at which a subject is indifferent between L and R at
/// question `q`. `None` when no indifference exists in the search bracket
/// (question 10, where R dominates).
pub fn indifference_root(q: u8) -> Option<f64> {
    match bisect(
        |r| crra_preference_gap(q, r),
        CRRA_SEARCH.0,
        CRRA_SEARCH.1,
        CRRA_TOL,
    ) {
        Bracket::Root(r) => Some(r),
        Bracket::NoSignChange => None,
    }
}

/// Open CRRA interval consistent with a switch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrraInterval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for CrraInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: f64| {
            if x.is_infinite() {
                if x < 0.0 {
                    "-inf".to_string()
                } else {
                    "+inf".to_string()
                }
            } else {
                format!("{x:.4}")
            }
        };
        write!(f, "({}, {})", show(self.lo), show(self.hi))
    }
}

/// Interval of `r` under which a CRRA expected-utility maximizer chooses L
/// on questions `1..k` and R on `k..=10`.
pub fn crra_interval(switch_point: i64) -> Result<CrraInterval, RiskError> {
    if !(1..=QUESTIONS as i64).contains(&switch_point) {
        return Err(RiskError::SwitchPointOutOfRange(switch_point));
    }
    let k = switch_point as u8;
    let lo = if k == 1 {
        f64::NEG_INFINITY
    } else {
        indifference_root(k - 1).unwrap_or(f64::NEG_INFINITY)
    };
    let hi = indifference_root(k).unwrap_or(f64::INFINITY);
    Ok(CrraInterval { lo, hi })
}

/// Choices of an expected-utility maximizer with CRRA coefficient `r`.
/// Indifference goes to L.
pub fn crra_choices(r: f64) -> ChoiceVector {
    let mut picks = [Pick::L; QUESTIONS];
    for (i, pick) in picks.iter_mut().enumerate() {
        if crra_preference_gap(i as u8 + 1, r) < 0.0 {
            *pick = Pick::R;
        }
    }
    ChoiceVector(picks)
}

/// Choices of a risk-neutral subject comparing exact expected values.
pub fn expected_value_choices() -> ChoiceVector {
    let mut picks = [Pick::L; QUESTIONS];
    for (pick, pair) in picks.iter_mut().zip(lottery_table()) {
        if pair.ev_gap() < 0 {
            *pick = Pick::R;
        }
    }
    ChoiceVector(picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ev_gap_column() {
        let printed = [
            2680, 1910, 1140, 370, -400, -1170, -1940, -2710, -3480, -4250,
        ];
        for (q, want) in (1..=10).zip(printed) {
            assert_eq!(lottery_ev_gap(q).unwrap(), want, "question {q}");
        }
        assert!(lottery_ev_gap(0).is_err());
        assert!(lottery_ev_gap(11).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify_risk(&"LLLLRRRRRR".parse().unwrap());
        assert_eq!(c.attitude, RiskAttitude::Neutral);
        assert_eq!(c.switch_point, Some(5));

        let c = classify_risk(&"LLLLLRLRRR".parse().unwrap());
        assert_eq!(c.attitude, RiskAttitude::Inconsistent);
        assert_eq!(c.switch_point, None);

        let c = classify_risk(&"RRRRRRRRRR".parse().unwrap());
        assert_eq!(c.attitude, RiskAttitude::Loving);
        assert_eq!(c.switch_point, Some(1));

        let c = classify_risk(&"LLLLLLLRRR".parse().unwrap());
        assert_eq!(c.attitude, RiskAttitude::Averse);
        assert_eq!(c.switch_point, Some(8));

        let never = classify_risk(&"LLLLLLLLLL".parse().unwrap());
        assert_eq!(never.attitude, RiskAttitude::Inconsistent);
    }

    #[test]
    fn choice_vector_length() {
        assert_eq!(
            "LLR".parse::<ChoiceVector>(),
            Err(RiskError::WrongLength(3))
        );
        assert_eq!(
            "LLLLXRRRRR".parse::<ChoiceVector>(),
            Err(RiskError::InvalidPick('X'))
        );
    }

    #[test]
    fn neutral_interval() {
        let iv = crra_interval(5).unwrap();
        assert!((iv.lo + 0.15).abs() <= 0.01, "{iv}");
        assert!((iv.hi - 0.15).abs() <= 0.01, "{iv}");
    }

    #[test]
    fn extreme_intervals() {
        let first = crra_interval(1).unwrap();
        assert_eq!(first.lo, f64::NEG_INFINITY);
        assert!(first.hi.is_finite());
        let last = crra_interval(10).unwrap();
        assert!(last.lo.is_finite());
        assert_eq!(last.hi, f64::INFINITY);
        assert!(crra_interval(0).is_err());
        assert!(crra_interval(11).is_err());
    }

    #[test]
    fn adjacent_intervals_share_roots() {
        for k in 2..=10 {
            let prev = crra_interval(k - 1).unwrap();
            let cur = crra_interval(k).unwrap();
            assert_eq!(cur.lo, prev.hi, "k = {k}");
            assert!(cur.lo < cur.hi);
            assert!(prev.lo < cur.lo);
        }
    }

    #[test]
    fn log_branch_is_continuous() {
        let w = 37.5;
        let at_one = crra_utility(w, 1.0);
        assert!((crra_utility(w, 1.0 + 1e-7) - at_one).abs() < 1e-5);
        assert!((crra_utility(w, 1.0 - 1e-7) - at_one).abs() < 1e-5);
    }

    #[test]
    fn risk_neutral_chooser_switches_at_five() {
        assert_eq!(expected_value_choices().to_string(), "LLLLRRRRRR");
        assert_eq!(crra_choices(0.0).to_string(), "LLLLRRRRRR");
        assert_eq!(classify_risk(&crra_choices(0.0)).switch_point, Some(5));
    }

    #[test]
    fn chooser_lands_in_its_interval() {
        for r in [-2.5, -1.2, -0.3, 0.05, 0.3, 0.5, 0.8, 1.0, 1.1, 2.0, 6.0] {
            let class = classify_risk(&crra_choices(r));
            let k = class.switch_point.expect("consistent") as i64;
            let iv = crra_interval(k).unwrap();
            assert!(iv.lo < r && r < iv.hi, "r={r} k={k} {iv}");
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = lottery_table_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "question,pL_high,L_high,L_low,R_high,R_low,ev_gap"
        );
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[1], "1,0.1,3750,3550,8000,100,2680");
        assert_eq!(lines[10], "10,1.0,3750,3550,8000,100,-4250");
    }
}
