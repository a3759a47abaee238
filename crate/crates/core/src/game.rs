//! The three-player dictator game with a third party (Player C) who may
//! punish the dictator, invest in a lottery, or keep tokens in a safe
//! private account.
//!
//! Player A starts with 100 tokens and transfers `t` of them to Player B.
//! Player C holds 50 tokens. One deduction point costs C one token and
//! removes three tokens from A. One investment point costs one token and
//! returns `multiplier` tokens on a win (probability one half).
//!
//! Token amounts are integers. Anything involving the lottery mean or the
//! 3/2 multiplier is carried as an exact rational.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENDOWMENT_A: i64 = 100;
pub const ENDOWMENT_C: i64 = 50;
/// Tokens removed from Player A per deduction point.
pub const PUNISHMENT_LEVERAGE: i64 = 3;
pub const BUDGET: i64 = ENDOWMENT_C;
pub const KRW_PER_TOKEN: i64 = 80;
pub const SHOWUP_FEE_KRW: i64 = 3000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid action: {0}")]
    InvalidAction(#[from] ActionViolation),
    #[error("lottery outcome {outcome:?} inconsistent with investment of {investment} tokens")]
    InconsistentOutcome {
        outcome: LotteryOutcome,
        investment: i64,
    },
    #[error("transfer level {0} is not one of 0, 10, 20, 30, 40, 50")]
    InvalidTransfer(i64),
    #[error("unknown treatment `{0}`")]
    UnknownTreatment(String),
    #[error("unknown lottery outcome `{0}`")]
    UnknownOutcome(String),
    #[error("token amount must be nonnegative, got {0}")]
    NegativeTokens(Rational64),
}

/// Why a third-party action is not admissible in a treatment.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ActionViolation {
    #[error("{field} must be nonnegative, got {value}")]
    Negative { field: &'static str, value: i64 },
    #[error("punishment is not available in treatment {0}")]
    PunishmentUnavailable(TreatmentId),
    #[error("investment is not available in treatment {0}")]
    InvestmentUnavailable(TreatmentId),
    #[error("deduction + investment = {total} exceeds the budget of {BUDGET}")]
    BudgetExceeded { total: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TreatmentId {
    P,
    PI0,
    I0,
    PIneg,
    Ineg,
}

impl TreatmentId {
    pub const ALL: [TreatmentId; 5] = [
        TreatmentId::P,
        TreatmentId::PI0,
        TreatmentId::I0,
        TreatmentId::PIneg,
        TreatmentId::Ineg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TreatmentId::P => "P",
            TreatmentId::PI0 => "PI0",
            TreatmentId::I0 => "I0",
            TreatmentId::PIneg => "PIneg",
            TreatmentId::Ineg => "Ineg",
        }
    }
}

impl fmt::Display for TreatmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreatmentId {
    type Err = GameError;

    /// Accepts `PI0` as well as the ampersand spelling `P&I0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| *c != '&')
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "p" => Ok(TreatmentId::P),
            "pi0" | "pio" => Ok(TreatmentId::PI0),
            "i0" | "io" => Ok(TreatmentId::I0),
            "pineg" => Ok(TreatmentId::PIneg),
            "ineg" => Ok(TreatmentId::Ineg),
            _ => Err(GameError::UnknownTreatment(s.to_string())),
        }
    }
}

/// A treatment's choice set and lottery terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Treatment {
    pub id: TreatmentId,
    pub punishment_available: bool,
    pub investment_available: bool,
    /// Gross return per investment point on a win; `None` iff investment
    /// is unavailable.
    pub return_multiplier: Option<Rational64>,
    pub win_probability: Rational64,
}

impl Treatment {
    pub fn new(id: TreatmentId) -> Self {
        let zero_return = Some(Rational64::from_integer(2));
        let negative_return = Some(Rational64::new(3, 2));
        let (punishment_available, investment_available, return_multiplier) = match id {
            TreatmentId::P => (true, false, None),
            TreatmentId::PI0 => (true, true, zero_return),
            TreatmentId::I0 => (false, true, zero_return),
            TreatmentId::PIneg => (true, true, negative_return),
            TreatmentId::Ineg => (false, true, negative_return),
        };
        Treatment {
            id,
            punishment_available,
            investment_available,
            return_multiplier,
            win_probability: Rational64::new(1, 2),
        }
    }

    pub fn all() -> [Treatment; 5] {
        TreatmentId::ALL.map(Treatment::new)
    }

    /// True for the variants whose lottery has a negative expected net return.
    pub fn negative_return(&self) -> bool {
        matches!(self.id, TreatmentId::PIneg | TreatmentId::Ineg)
    }
}

impl From<TreatmentId> for Treatment {
    fn from(id: TreatmentId) -> Self {
        Treatment::new(id)
    }
}

/// Player A's transfer to Player B, one of the six strategy-method cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct TransferLevel(u8);

impl TransferLevel {
    pub const ALL: [TransferLevel; 6] = [
        TransferLevel(0),
        TransferLevel(10),
        TransferLevel(20),
        TransferLevel(30),
        TransferLevel(40),
        TransferLevel(50),
    ];
    /// The unequal transfers the choice models are defined on.
    pub const UNEQUAL: [TransferLevel; 5] = [
        TransferLevel(0),
        TransferLevel(10),
        TransferLevel(20),
        TransferLevel(30),
        TransferLevel(40),
    ];

    pub fn new(t: i64) -> Result<Self, GameError> {
        if (0..=50).contains(&t) && t % 10 == 0 {
            Ok(TransferLevel(t as u8))
        } else {
            Err(GameError::InvalidTransfer(t))
        }
    }

    pub fn tokens(self) -> i64 {
        self.0 as i64
    }

    pub fn index(self) -> usize {
        (self.0 / 10) as usize
    }
}

impl TryFrom<i64> for TransferLevel {
    type Error = GameError;
    fn try_from(t: i64) -> Result<Self, Self::Error> {
        TransferLevel::new(t)
    }
}

impl From<TransferLevel> for i64 {
    fn from(t: TransferLevel) -> i64 {
        t.tokens()
    }
}

impl fmt::Display for TransferLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Player C's allocation of the 50-token budget. Whatever is not spent on
/// deduction or investment stays in the safe account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ThirdPartyAction {
    pub deduction: i64,
    pub investment: i64,
}

impl ThirdPartyAction {
    pub fn new(deduction: i64, investment: i64) -> Self {
        ThirdPartyAction {
            deduction,
            investment,
        }
    }

    pub fn safe(&self) -> i64 {
        BUDGET - self.deduction - self.investment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LotteryOutcome {
    Win,
    Lose,
    NotApplicable,
}

impl FromStr for LotteryOutcome {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "win" | "white" => Ok(LotteryOutcome::Win),
            "lose" | "red" => Ok(LotteryOutcome::Lose),
            "na" | "none" | "n/a" => Ok(LotteryOutcome::NotApplicable),
            _ => Err(GameError::UnknownOutcome(s.to_string())),
        }
    }
}

/// Final tokens for Players A, B and C.
///
/// Realized payoffs in the 3/2-multiplier treatments can land on half
/// tokens, and ex-ante values on quarters, so all three are rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PayoffVector {
    pub a: Rational64,
    pub b: Rational64,
    pub c: Rational64,
}

impl PayoffVector {
    pub fn from_integers(a: i64, b: i64, c: i64) -> Self {
        PayoffVector {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [ratio_f64(self.a), ratio_f64(self.b), ratio_f64(self.c)]
    }
}

impl fmt::Display for PayoffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A={} B={} C={}",
            fmt_ratio(self.a),
            fmt_ratio(self.b),
            fmt_ratio(self.c)
        )
    }
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Integers print bare, everything else as a decimal.
pub fn fmt_ratio(r: Rational64) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}", ratio_f64(r))
    }
}

pub fn validate_action(
    treatment: &Treatment,
    action: &ThirdPartyAction,
) -> Result<(), ActionViolation> {
    if action.deduction < 0 {
        return Err(ActionViolation::Negative {
            field: "deduction",
            value: action.deduction,
        });
    }
    if action.investment < 0 {
        return Err(ActionViolation::Negative {
            field: "investment",
            value: action.investment,
        });
    }
    if action.deduction > 0 && !treatment.punishment_available {
        return Err(ActionViolation::PunishmentUnavailable(treatment.id));
    }
    if action.investment > 0 && !treatment.investment_available {
        return Err(ActionViolation::InvestmentUnavailable(treatment.id));
    }
    let total = action.deduction + action.investment;
    if total > BUDGET {
        return Err(ActionViolation::BudgetExceeded { total });
    }
    Ok(())
}

fn multiplier(treatment: &Treatment) -> Rational64 {
    treatment.return_multiplier.unwrap_or_else(Rational64::zero)
}

fn dictator_side(t: TransferLevel, action: &ThirdPartyAction) -> (Rational64, Rational64) {
    let a = ENDOWMENT_A - t.tokens() - PUNISHMENT_LEVERAGE * action.deduction;
    (a.into(), t.tokens().into())
}

pub fn realized_payoffs(
    treatment: &Treatment,
    t: TransferLevel,
    action: &ThirdPartyAction,
    outcome: LotteryOutcome,
) -> Result<PayoffVector, GameError> {
    validate_action(treatment, action)?;
    let invested = action.investment > 0;
    let consistent = match outcome {
        LotteryOutcome::NotApplicable => !invested,
        LotteryOutcome::Win | LotteryOutcome::Lose => invested,
    };
    if !consistent {
        return Err(GameError::InconsistentOutcome {
            outcome,
            investment: action.investment,
        });
    }
    let (a, b) = dictator_side(t, action);
    let mut c = Rational64::from_integer(action.safe());
    if outcome == LotteryOutcome::Win {
        c += multiplier(treatment) * action.investment;
    }
    Ok(PayoffVector { a, b, c })
}

/// Payoffs with Player C's lottery replaced by its expectation.
pub fn ex_ante_expected_payoffs(
    treatment: &Treatment,
    t: TransferLevel,
    action: &ThirdPartyAction,
) -> Result<PayoffVector, GameError> {
    validate_action(treatment, action)?;
    let (a, b) = dictator_side(t, action);
    let c = Rational64::from_integer(action.safe())
        + treatment.win_probability * multiplier(treatment) * action.investment;
    Ok(PayoffVector { a, b, c })
}

/// Real-valued ex-ante and ex-post allocations `[A, B, C]` for possibly
/// fractional `deduction` and `investment`. The probabilities are exact.
///
/// With no investment the ex-post distribution is the single ex-ante point.
#[derive(Debug, Clone, PartialEq)]
pub struct LotteryBranches {
    pub ex_ante: [f64; 3],
    pub ex_post: Vec<(Rational64, [f64; 3])>,
}

pub fn lottery_branches(
    treatment: &Treatment,
    t: f64,
    deduction: f64,
    investment: f64,
) -> LotteryBranches {
    let a = ENDOWMENT_A as f64 - t - PUNISHMENT_LEVERAGE as f64 * deduction;
    let keep = ENDOWMENT_C as f64 - deduction - investment;
    let mult = ratio_f64(multiplier(treatment));
    let win_p = treatment.win_probability;
    let win_c = keep + mult * investment;
    let ex_ante_c = keep + ratio_f64(win_p) * mult * investment;
    let ex_post = if investment > 0.0 {
        vec![
            (win_p, [a, t, win_c]),
            (Rational64::from_integer(1) - win_p, [a, t, keep]),
        ]
    } else {
        vec![(Rational64::from_integer(1), [a, t, keep])]
    };
    LotteryBranches {
        ex_ante: [a, t, ex_ante_c],
        ex_post,
    }
}

/// Total cash in KRW: optional show-up fee, Task 1 winnings, and Task 2
/// tokens at 80 KRW each.
pub fn final_cash_krw(
    task1_krw: i64,
    task2_tokens: Rational64,
    include_showup: bool,
) -> Result<Rational64, GameError> {
    if task2_tokens < Rational64::zero() {
        return Err(GameError::NegativeTokens(task2_tokens));
    }
    let showup = if include_showup { SHOWUP_FEE_KRW } else { 0 };
    Ok(Rational64::from_integer(showup + task1_krw) + task2_tokens * KRW_PER_TOKEN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(id: TreatmentId) -> Treatment {
        Treatment::new(id)
    }

    fn t(x: i64) -> TransferLevel {
        TransferLevel::new(x).unwrap()
    }

    #[test]
    fn choice_sets_match_design() {
        let expect = [
            (TreatmentId::P, true, false),
            (TreatmentId::PI0, true, true),
            (TreatmentId::I0, false, true),
            (TreatmentId::PIneg, true, true),
            (TreatmentId::Ineg, false, true),
        ];
        for (id, p, i) in expect {
            let tr = tr(id);
            assert_eq!(tr.punishment_available, p, "{id}");
            assert_eq!(tr.investment_available, i, "{id}");
            assert_eq!(tr.return_multiplier.is_some(), i, "{id}");
        }
        assert_eq!(tr(TreatmentId::PI0).return_multiplier, Some(2.into()));
        assert_eq!(
            tr(TreatmentId::Ineg).return_multiplier,
            Some(Rational64::new(3, 2))
        );
    }

    #[test]
    fn parses_treatment_spellings() {
        assert_eq!("P&I0".parse::<TreatmentId>().unwrap(), TreatmentId::PI0);
        assert_eq!("p&ineg".parse::<TreatmentId>().unwrap(), TreatmentId::PIneg);
        assert!("PX".parse::<TreatmentId>().is_err());
    }

    #[test]
    fn transfer_levels() {
        assert!(TransferLevel::new(35).is_err());
        assert!(TransferLevel::new(60).is_err());
        assert!(TransferLevel::new(-10).is_err());
        assert_eq!(t(40).index(), 4);
    }

    #[test]
    fn validation_examples() {
        let pi0 = tr(TreatmentId::PI0);
        assert_eq!(validate_action(&pi0, &ThirdPartyAction::new(0, 0)), Ok(()));
        assert_eq!(
            validate_action(&pi0, &ThirdPartyAction::new(30, 25)),
            Err(ActionViolation::BudgetExceeded { total: 55 })
        );
        assert_eq!(
            validate_action(&tr(TreatmentId::P), &ThirdPartyAction::new(5, 5)),
            Err(ActionViolation::InvestmentUnavailable(TreatmentId::P))
        );
        assert_eq!(
            validate_action(&tr(TreatmentId::I0), &ThirdPartyAction::new(1, 0)),
            Err(ActionViolation::PunishmentUnavailable(TreatmentId::I0))
        );
        assert!(matches!(
            validate_action(&pi0, &ThirdPartyAction::new(-1, 0)),
            Err(ActionViolation::Negative { .. })
        ));
    }

    #[test]
    fn realized_examples() {
        let pi0 = tr(TreatmentId::PI0);
        let act = ThirdPartyAction::new(18, 14);
        assert_eq!(
            realized_payoffs(&pi0, t(10), &act, LotteryOutcome::Win).unwrap(),
            PayoffVector::from_integers(36, 10, 46)
        );
        assert_eq!(
            realized_payoffs(&pi0, t(10), &act, LotteryOutcome::Lose).unwrap(),
            PayoffVector::from_integers(36, 10, 18)
        );
        assert_eq!(
            realized_payoffs(
                &tr(TreatmentId::P),
                t(0),
                &ThirdPartyAction::default(),
                LotteryOutcome::NotApplicable
            )
            .unwrap(),
            PayoffVector::from_integers(100, 0, 50)
        );
    }

    #[test]
    fn outcome_must_match_investment() {
        let pi0 = tr(TreatmentId::PI0);
        assert!(matches!(
            realized_payoffs(
                &pi0,
                t(10),
                &ThirdPartyAction::new(3, 0),
                LotteryOutcome::Win
            ),
            Err(GameError::InconsistentOutcome { .. })
        ));
        assert!(matches!(
            realized_payoffs(
                &pi0,
                t(10),
                &ThirdPartyAction::new(0, 3),
                LotteryOutcome::NotApplicable
            ),
            Err(GameError::InconsistentOutcome { .. })
        ));
        assert!(matches!(
            realized_payoffs(
                &pi0,
                t(10),
                &ThirdPartyAction::new(40, 40),
                LotteryOutcome::Win
            ),
            Err(GameError::InvalidAction(
                ActionViolation::BudgetExceeded { .. }
            ))
        ));
    }

    #[test]
    fn ex_ante_examples() {
        assert_eq!(
            ex_ante_expected_payoffs(
                &tr(TreatmentId::PIneg),
                t(10),
                &ThirdPartyAction::new(0, 20)
            )
            .unwrap(),
            PayoffVector::from_integers(90, 10, 45)
        );
        assert_eq!(
            ex_ante_expected_payoffs(&tr(TreatmentId::PI0), t(0), &ThirdPartyAction::new(10, 10))
                .unwrap(),
            PayoffVector::from_integers(70, 0, 40)
        );
        for tr in Treatment::all() {
            assert_eq!(
                ex_ante_expected_payoffs(&tr, t(30), &ThirdPartyAction::default()).unwrap(),
                PayoffVector::from_integers(70, 30, 50)
            );
        }
        // z/4 loss in quarters
        let v =
            ex_ante_expected_payoffs(&tr(TreatmentId::Ineg), t(0), &ThirdPartyAction::new(0, 3))
                .unwrap();
        assert_eq!(v.c, Rational64::new(50 * 4 - 3, 4));
    }

    #[test]
    fn half_token_win_in_negative_return() {
        let v = realized_payoffs(
            &tr(TreatmentId::Ineg),
            t(20),
            &ThirdPartyAction::new(0, 3),
            LotteryOutcome::Win,
        )
        .unwrap();
        assert_eq!(v.c, Rational64::new(103, 2));
        assert_eq!(v.to_string(), "A=80 B=20 C=51.5");
    }

    #[test]
    fn cash_examples() {
        assert_eq!(final_cash_krw(3750, 30.into(), false).unwrap(), 6150.into());
        assert_eq!(final_cash_krw(3750, 30.into(), true).unwrap(), 9150.into());
        assert_eq!(final_cash_krw(0, 0.into(), true).unwrap(), 3000.into());
        assert!(final_cash_krw(0, (-1).into(), true).is_err());
    }

    #[test]
    fn branches_match_integer_payoffs() {
        for tr in Treatment::all() {
            for tl in TransferLevel::ALL {
                for (p, z) in [(0, 0), (5, 0), (0, 7), (10, 13)] {
                    let act = ThirdPartyAction::new(p, z);
                    if validate_action(&tr, &act).is_err() {
                        continue;
                    }
                    let br = lottery_branches(&tr, tl.tokens() as f64, p as f64, z as f64);
                    let ea = ex_ante_expected_payoffs(&tr, tl, &act).unwrap();
                    assert_eq!(br.ex_ante, ea.to_f64());
                    if z > 0 {
                        let win = realized_payoffs(&tr, tl, &act, LotteryOutcome::Win).unwrap();
                        let lose = realized_payoffs(&tr, tl, &act, LotteryOutcome::Lose).unwrap();
                        assert_eq!(br.ex_post[0].1, win.to_f64());
                        assert_eq!(br.ex_post[1].1, lose.to_f64());
                    } else {
                        assert_eq!(br.ex_post.len(), 1);
                    }
                }
            }
        }
    }
}
