//! Inequity aversion under risk: Fehr–Schmidt utility over the three
//! players' allocations, mixed between the ex-ante expected allocation and
//! the expected ex-post utility with weight `delta`.
//!
//! The envy and guilt terms are summed over both other players without the
//! usual `1/(n-1)` normalization. That convention is the one under which
//! the safe option's value is exactly `50 - (50 - t)(alpha + beta)`.
//!
//! The closed-form partworths below are piecewise in the amount invested
//! or spent on punishment. [`partworth_oracle`] recomputes each of them from
//! the game's allocations and is the ground truth they are tested against.
//! For punishment there are two closed forms: the published three-branch
//! expression ([`partworth_punish_printed`]) and the one that follows from
//! the utility ([`partworth_punish_direct`]). They agree only on the first
//! branch; [`punish_residuals`] records the gap.

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::game::{lottery_branches, Treatment, TreatmentId};
use crate::nccm::OptionKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaitoError {
    #[error("need alpha + beta > 1 and alpha > beta > 0, got alpha = {alpha}, beta = {beta}")]
    Weights { alpha: f64, beta: f64 },
    #[error("delta = {0} must lie in [0, 1]")]
    Delta(f64),
    #[error("{0} must be positive here; use partworth_safe for a zero amount")]
    ZeroAmount(&'static str),
    #[error("{name} = {value} outside [0, 50]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("outcome probabilities must be positive and sum to 1")]
    Distribution,
    #[error("option {option} is not available in treatment {treatment}")]
    Unavailable {
        option: OptionKind,
        treatment: TreatmentId,
    },
    #[error("option {option} requires {detail}")]
    Inconsistent {
        option: OptionKind,
        detail: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsParams {
    /// Envy weight, applied when another player has more.
    pub alpha: f64,
    /// Guilt weight, applied when another player has less.
    pub beta: f64,
    /// Weight on ex-ante fairness.
    pub delta: f64,
}

impl FsParams {
    pub fn new(alpha: f64, beta: f64, delta: f64) -> Result<Self, SaitoError> {
        let p = FsParams { alpha, beta, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SaitoError> {
        let FsParams { alpha, beta, delta } = *self;
        if !(alpha + beta > 1.0 && alpha > beta && beta > 0.0 && alpha.is_finite()) {
            return Err(SaitoError::Weights { alpha, beta });
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(SaitoError::Delta(delta));
        }
        Ok(())
    }

    fn weight_sum(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// Tokens held by Players A, B and C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Allocation {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Allocation { a, b, c }
    }
}

impl From<[f64; 3]> for Allocation {
    fn from(v: [f64; 3]) -> Self {
        Allocation::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution(Vec<(Rational64, Allocation)>);

impl OutcomeDistribution {
    pub fn new(outcomes: Vec<(Rational64, Allocation)>) -> Result<Self, SaitoError> {
        let positive = outcomes.iter().all(|(p, _)| *p > Rational64::zero());
        let total: Rational64 = outcomes.iter().map(|(p, _)| *p).sum();
        if outcomes.is_empty() || !positive || total != Rational64::one() {
            return Err(SaitoError::Distribution);
        }
        Ok(OutcomeDistribution(outcomes))
    }

    pub fn certain(alloc: Allocation) -> Self {
        OutcomeDistribution(vec![(Rational64::one(), alloc)])
    }

    pub fn outcomes(&self) -> &[(Rational64, Allocation)] {
        &self.0
    }
}

/// Player C's Fehr–Schmidt utility, unnormalized over the two others.
pub fn fs_utility(alloc: &Allocation, params: &FsParams) -> Result<f64, SaitoError> {
    params.validate()?;
    Ok(fs_raw(alloc, params))
}

fn fs_raw(alloc: &Allocation, params: &FsParams) -> f64 {
    let c = alloc.c;
    let envy: f64 = [alloc.a, alloc.b].iter().map(|x| (x - c).max(0.0)).sum();
    let guilt: f64 = [alloc.a, alloc.b].iter().map(|x| (c - x).max(0.0)).sum();
    c - params.alpha * envy - params.beta * guilt
}

pub fn saito_value(
    ex_ante: &Allocation,
    ex_post: &OutcomeDistribution,
    params: &FsParams,
) -> Result<f64, SaitoError> {
    params.validate()?;
    let expected_ex_post: f64 = ex_post
        .0
        .iter()
        .map(|(p, alloc)| p.to_f64().expect("finite ratio") * fs_raw(alloc, params))
        .sum();
    Ok(params.delta * fs_raw(ex_ante, params) + (1.0 - params.delta) * expected_ex_post)
}

fn check_amount(name: &'static str, value: f64) -> Result<(), SaitoError> {
    if !(0.0..=50.0).contains(&value) {
        return Err(SaitoError::OutOfRange { name, value });
    }
    Ok(())
}

/// Value of keeping everything in the safe account.
pub fn partworth_safe(t: f64, params: &FsParams) -> Result<f64, SaitoError> {
    params.validate()?;
    check_amount("t", t)?;
    Ok(50.0 - (50.0 - t) * params.weight_sum())
}

/// Which closed-form piece produced a value; 1-based, in the order of the
/// breakpoints.
pub type Branch = u8;

/// Zero-expected-return lottery with `z` tokens invested and no
/// punishment. Returns the value and the branch used.
pub fn partworth_invest_zero_branch(
    t: f64,
    z: f64,
    params: &FsParams,
) -> Result<(f64, Branch), SaitoError> {
    let safe = partworth_safe(t, params)?;
    check_amount("z", z)?;
    if z <= 0.0 {
        return Err(SaitoError::ZeroAmount("z"));
    }
    let gap = 50.0 - t;
    if z <= gap {
        Ok((safe, 1))
    } else {
        Ok((
            safe + (1.0 - params.delta) * (gap - z) * params.weight_sum(),
            2,
        ))
    }
}

pub fn partworth_invest_zero(t: f64, z: f64, params: &FsParams) -> Result<f64, SaitoError> {
    partworth_invest_zero_branch(t, z, params).map(|(v, _)| v)
}

/// Negative-return lottery (win `+z/2`, lose `-z`) with `z` invested.
pub fn partworth_invest_neg_branch(
    t: f64,
    z: f64,
    params: &FsParams,
) -> Result<(f64, Branch), SaitoError> {
    let safe = partworth_safe(t, params)?;
    check_amount("z", z)?;
    if z <= 0.0 {
        return Err(SaitoError::ZeroAmount("z"));
    }
    let FsParams { alpha, beta, delta } = *params;
    let ab = alpha + beta;
    let gap = 50.0 - t;
    let base = safe - z / 4.0 * (1.0 + alpha - beta);
    Ok(if z < gap {
        (base, 1)
    } else if z < 2.0 * gap {
        (base + (1.0 - delta) * (25.0 - t / 2.0 - z / 2.0) * ab, 2)
    } else if z < 4.0 * gap {
        (base + (1.0 - delta) * (50.0 - t - 0.75 * z) * ab, 3)
    } else {
        (
            50.0 - z / 4.0 - z / 2.0 * alpha - (1.0 - delta) * z / 2.0 * ab,
            4,
        )
    })
}

pub fn partworth_invest_neg(t: f64, z: f64, params: &FsParams) -> Result<f64, SaitoError> {
    partworth_invest_neg_branch(t, z, params).map(|(v, _)| v)
}

fn punish_branch(t: f64, p: f64) -> Branch {
    let gap = 50.0 - t;
    if p < gap / 2.0 {
        1
    } else if p < gap {
        2
    } else {
        3
    }
}

/// The published punishment partworth, evaluated exactly as written.
/// Branches 2 and 3 do not follow from the utility; see
/// [`partworth_punish_direct`].
pub fn partworth_punish_printed_branch(
    t: f64,
    p: f64,
    params: &FsParams,
) -> Result<(f64, Branch), SaitoError> {
    let safe = partworth_safe(t, params)?;
    check_amount("p", p)?;
    if p <= 0.0 {
        return Err(SaitoError::ZeroAmount("p"));
    }
    let FsParams { alpha, beta, .. } = *params;
    let branch = punish_branch(t, p);
    let v = match branch {
        1 => safe - p * (1.0 - 2.0 * alpha - beta),
        2 => 50.0 - p * beta,
        _ => 50.0 - (t - 50.0) * (alpha + beta) - p * (1.0 - alpha - 2.0 * beta),
    };
    Ok((v, branch))
}

pub fn partworth_punish_printed(t: f64, p: f64, params: &FsParams) -> Result<f64, SaitoError> {
    partworth_punish_printed_branch(t, p, params).map(|(v, _)| v)
}

/// Punishment partworth derived from the utility:
///
/// ```text
/// p < (50-t)/2        50 - (50-t)(α+β) - p(1 - 2α - β)
/// (50-t)/2 ≤ p < 50-t 50 - p(1 + β)
/// p ≥ 50-t            50 + (50-t)(α+β) - p(1 + α + 2β)
/// ```
pub fn partworth_punish_direct_branch(
    t: f64,
    p: f64,
    params: &FsParams,
) -> Result<(f64, Branch), SaitoError> {
    let safe = partworth_safe(t, params)?;
    check_amount("p", p)?;
    if p <= 0.0 {
        return Err(SaitoError::ZeroAmount("p"));
    }
    let FsParams { alpha, beta, .. } = *params;
    let branch = punish_branch(t, p);
    let v = match branch {
        1 => safe - p * (1.0 - 2.0 * alpha - beta),
        2 => 50.0 - p * (1.0 + beta),
        _ => 50.0 + (50.0 - t) * (alpha + beta) - p * (1.0 + alpha + 2.0 * beta),
    };
    Ok((v, branch))
}

pub fn partworth_punish_direct(t: f64, p: f64, params: &FsParams) -> Result<f64, SaitoError> {
    partworth_punish_direct_branch(t, p, params).map(|(v, _)| v)
}

/// Brute-force partworth: assembles the ex-ante allocation and the
/// ex-post outcome distribution for the action from the game rules and
/// evaluates [`saito_value`] on them.
///
/// `TP` needs `p > 0, z = 0`; `I` needs `p = 0, z > 0`; `S` needs both zero.
pub fn partworth_oracle(
    option: OptionKind,
    treatment: &Treatment,
    t: f64,
    p: f64,
    z: f64,
    params: &FsParams,
) -> Result<f64, SaitoError> {
    params.validate()?;
    check_amount("t", t)?;
    check_amount("p", p)?;
    check_amount("z", z)?;
    let (needs_p, needs_z) = match option {
        OptionKind::TP => (true, false),
        OptionKind::I => (false, true),
        OptionKind::S => (false, false),
    };
    if (p > 0.0) != needs_p {
        return Err(SaitoError::Inconsistent {
            option,
            detail: if needs_p { "p > 0" } else { "p = 0" },
        });
    }
    if (z > 0.0) != needs_z {
        return Err(SaitoError::Inconsistent {
            option,
            detail: if needs_z { "z > 0" } else { "z = 0" },
        });
    }
    let available = match option {
        OptionKind::TP => treatment.punishment_available,
        OptionKind::I => treatment.investment_available,
        OptionKind::S => true,
    };
    if !available {
        return Err(SaitoError::Unavailable {
            option,
            treatment: treatment.id,
        });
    }
    let branches = lottery_branches(treatment, t, p, z);
    let ex_post = OutcomeDistribution::new(
        branches
            .ex_post
            .into_iter()
            .map(|(prob, v)| (prob, v.into()))
            .collect(),
    )?;
    saito_value(&branches.ex_ante.into(), &ex_post, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LotteryKind {
    ZeroReturn,
    NegativeReturn,
}

impl LotteryKind {
    pub fn treatment(self) -> Treatment {
        match self {
            LotteryKind::ZeroReturn => Treatment::new(TreatmentId::PI0),
            LotteryKind::NegativeReturn => Treatment::new(TreatmentId::PIneg),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LotteryKind::ZeroReturn => "zero",
            LotteryKind::NegativeReturn => "negative",
        }
    }
}

/// Points at which partworths are compared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingGrid {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub z: Vec<f64>,
}

impl Default for RankingGrid {
    /// t in {0, 10, ..., 50}; p and z in {5, 10, ..., 50}.
    fn default() -> Self {
        let steps: Vec<f64> = (1..=10).map(|k| 5.0 * k as f64).collect();
        RankingGrid {
            t: (0..=5).map(|k| 10.0 * k as f64).collect(),
            p: steps.clone(),
            z: steps,
        }
    }
}

/// Partworths at one grid point. `branch` is the branch of the printed
/// punishment formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankingRow {
    pub t: f64,
    pub p: f64,
    pub z: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub w_tp_printed: f64,
    pub w_tp_oracle: f64,
    pub w_s: f64,
    pub w_i: f64,
    pub branch: Branch,
}

/// A broken claim found on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingFailure {
    pub t: f64,
    pub z: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub lottery: LotteryKind,
    pub params: FsParams,
    pub rows: Vec<RankingRow>,
    /// Violations of the safe-over-investment ordering; must be empty.
    pub failures: Vec<RankingFailure>,
    /// Grid points where the oracle ranks punishment below safe, contrary
    /// to the published claim. Reported, not asserted.
    pub tp_below_safe: usize,
}

impl RankingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut out =
            String::from("t,p,z,alpha,beta,delta,w_tp_printed,w_tp_oracle,w_s,w_i,branch\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.prec$},{:.prec$},{:.prec$},{:.prec$},{}\n",
                r.t,
                r.p,
                r.z,
                r.alpha,
                r.beta,
                r.delta,
                r.w_tp_printed,
                r.w_tp_oracle,
                r.w_s,
                r.w_i,
                r.branch,
                prec = precision
            ));
        }
        out
    }
}

/// Tabulates oracle partworths over the grid and checks the safe option
/// against the investment option:
///
/// * zero-return lottery: `W_S >= W_I`, with equality exactly when
///   `z <= 50 - t` or `delta = 1`;
/// * negative-return lottery: `W_S > W_I` whenever `delta < 1`.
pub fn ranking_report(
    params: &FsParams,
    grid: &RankingGrid,
    lottery: LotteryKind,
) -> Result<RankingReport, SaitoError> {
    params.validate()?;
    let treatment = lottery.treatment();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut tp_below_safe = 0;
    for &t in &grid.t {
        let w_s = partworth_oracle(OptionKind::S, &treatment, t, 0.0, 0.0, params)?;
        for &z in &grid.z {
            let w_i = partworth_oracle(OptionKind::I, &treatment, t, 0.0, z, params)?;
            let diff = w_s - w_i;
            match lottery {
                LotteryKind::ZeroReturn => {
                    let equal_expected = z <= 50.0 - t || params.delta == 1.0;
                    if diff < -1e-9 {
                        failures.push(RankingFailure {
                            t,
                            z,
                            detail: format!("W_S - W_I = {diff} < 0"),
                        });
                    } else if equal_expected && diff.abs() > 1e-9 {
                        failures.push(RankingFailure {
                            t,
                            z,
                            detail: format!("expected W_S = W_I, difference {diff}"),
                        });
                    } else if !equal_expected && diff <= 1e-9 {
                        failures.push(RankingFailure {
                            t,
                            z,
                            detail: format!("expected W_S > W_I, difference {diff}"),
                        });
                    }
                }
                LotteryKind::NegativeReturn => {
                    if params.delta < 1.0 && diff <= 0.0 {
                        failures.push(RankingFailure {
                            t,
                            z,
                            detail: format!("expected W_S > W_I, difference {diff}"),
                        });
                    }
                }
            }
            for &p in &grid.p {
                let (w_tp_printed, branch) = partworth_punish_printed_branch(t, p, params)?;
                let w_tp_oracle = partworth_oracle(OptionKind::TP, &treatment, t, p, 0.0, params)?;
                if w_tp_oracle < w_s {
                    tp_below_safe += 1;
                }
                rows.push(RankingRow {
                    t,
                    p,
                    z,
                    alpha: params.alpha,
                    beta: params.beta,
                    delta: params.delta,
                    w_tp_printed,
                    w_tp_oracle,
                    w_s,
                    w_i,
                    branch,
                });
            }
        }
    }
    Ok(RankingReport {
        lottery,
        params: *params,
        rows,
        failures,
        tp_below_safe,
    })
}

/// Printed-minus-oracle punishment partworth at one point on branch 2 or 3,
/// together with the residual predicted in closed form: `p` on branch 2 and
/// `2p(α + 2β)` on branch 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PunishResidual {
    pub t: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub branch: Branch,
    pub printed: f64,
    pub oracle: f64,
    pub residual: f64,
    pub predicted: f64,
}

pub fn predicted_punish_residual(p: f64, params: &FsParams, branch: Branch) -> f64 {
    match branch {
        1 => 0.0,
        2 => p,
        _ => 2.0 * p * (params.alpha + 2.0 * params.beta),
    }
}

/// Residuals of the printed punishment formula against the oracle for
/// every grid point outside its first branch.
pub fn punish_residuals(
    params: &FsParams,
    t_grid: &[f64],
    p_grid: &[f64],
) -> Result<Vec<PunishResidual>, SaitoError> {
    let treatment = Treatment::new(TreatmentId::P);
    let mut out = Vec::new();
    for &t in t_grid {
        for &p in p_grid {
            let (printed, branch) = partworth_punish_printed_branch(t, p, params)?;
            if branch == 1 {
                continue;
            }
            let oracle = partworth_oracle(OptionKind::TP, &treatment, t, p, 0.0, params)?;
            out.push(PunishResidual {
                t,
                p,
                alpha: params.alpha,
                beta: params.beta,
                branch,
                printed,
                oracle,
                residual: printed - oracle,
                predicted: predicted_punish_residual(p, params, branch),
            });
        }
    }
    Ok(out)
}

/// Largest closed-form-minus-oracle gap for one formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaCheck {
    pub formula: &'static str,
    pub points: usize,
    pub max_abs_error: f64,
    /// First point `(t, amount)` whose error exceeded the tolerance.
    pub first_failure: Option<(f64, f64)>,
}

impl FormulaCheck {
    fn new(formula: &'static str) -> Self {
        FormulaCheck {
            formula,
            points: 0,
            max_abs_error: 0.0,
            first_failure: None,
        }
    }

    fn record(&mut self, t: f64, x: f64, closed: f64, oracle: f64, tol: f64) {
        let err = (closed - oracle).abs();
        self.points += 1;
        if err > self.max_abs_error || err.is_nan() {
            self.max_abs_error = if err.is_nan() { f64::INFINITY } else { err };
        }
        if (err.is_nan() || err > tol) && self.first_failure.is_none() {
            self.first_failure = Some((t, x));
        }
    }

    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Compares each closed form with [`partworth_oracle`] at every `(t, x)`
/// pair, `x` being the amount invested or spent on punishment (positive).
/// The printed punishment formula is only compared on its first branch.
pub fn oracle_equivalence(
    params: &FsParams,
    t_grid: &[f64],
    x_grid: &[f64],
    tol: f64,
) -> Result<Vec<FormulaCheck>, SaitoError> {
    params.validate()?;
    let zero = Treatment::new(TreatmentId::PI0);
    let neg = Treatment::new(TreatmentId::PIneg);
    let punish = Treatment::new(TreatmentId::P);
    let mut safe = FormulaCheck::new("safe");
    let mut inv_zero = FormulaCheck::new("invest_zero");
    let mut inv_neg = FormulaCheck::new("invest_negative");
    let mut printed = FormulaCheck::new("punish_printed_branch1");
    let mut direct = FormulaCheck::new("punish_direct");
    for &t in t_grid {
        let s = partworth_safe(t, params)?;
        safe.record(
            t,
            0.0,
            s,
            partworth_oracle(OptionKind::S, &punish, t, 0.0, 0.0, params)?,
            tol,
        );
        for &x in x_grid {
            inv_zero.record(
                t,
                x,
                partworth_invest_zero(t, x, params)?,
                partworth_oracle(OptionKind::I, &zero, t, 0.0, x, params)?,
                tol,
            );
            inv_neg.record(
                t,
                x,
                partworth_invest_neg(t, x, params)?,
                partworth_oracle(OptionKind::I, &neg, t, 0.0, x, params)?,
                tol,
            );
            let oracle_tp = partworth_oracle(OptionKind::TP, &punish, t, x, 0.0, params)?;
            direct.record(t, x, partworth_punish_direct(t, x, params)?, oracle_tp, tol);
            let (v, branch) = partworth_punish_printed_branch(t, x, params)?;
            if branch == 1 {
                printed.record(t, x, v, oracle_tp, tol);
            }
        }
    }
    Ok(vec![safe, inv_zero, inv_neg, printed, direct])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(alpha: f64, beta: f64, delta: f64) -> FsParams {
        FsParams::new(alpha, beta, delta).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn parameter_validation() {
        assert!(FsParams::new(0.8, 0.4, 0.5).is_ok());
        assert!(FsParams::new(0.4, 0.8, 0.5).is_err());
        assert!(FsParams::new(0.6, 0.3, 0.5).is_err());
        assert!(FsParams::new(0.8, 0.0, 0.5).is_err());
        assert!(FsParams::new(0.8, 0.4, 1.5).is_err());
        assert!(FsParams::new(0.8, 0.4, -0.1).is_err());
    }

    #[test]
    fn utility_examples() {
        let p = fs(0.8, 0.4, 0.5);
        assert!(close(
            fs_utility(&Allocation::new(90.0, 10.0, 50.0), &p).unwrap(),
            2.0
        ));
        assert_eq!(
            fs_utility(&Allocation::new(50.0, 50.0, 50.0), &p).unwrap(),
            50.0
        );
        assert!(close(
            fs_utility(&Allocation::new(90.0, 10.0, 0.0), &p).unwrap(),
            -80.0
        ));
    }

    #[test]
    fn saito_examples() {
        let p = fs(0.8, 0.4, 0.5);
        let ex_ante = Allocation::new(90.0, 10.0, 50.0);
        let half = Rational64::new(1, 2);
        let dist = OutcomeDistribution::new(vec![
            (half, Allocation::new(90.0, 10.0, 100.0)),
            (half, Allocation::new(90.0, 10.0, 0.0)),
        ])
        .unwrap();
        assert!(close(saito_value(&ex_ante, &dist, &p).unwrap(), -4.0));
        let p1 = fs(0.8, 0.4, 1.0);
        assert!(close(saito_value(&ex_ante, &dist, &p1).unwrap(), 2.0));
        for d in [0.0, 0.3, 1.0] {
            let p = fs(0.9, 0.2, d);
            let a = Allocation::new(70.0, 20.0, 44.0);
            assert!(close(
                saito_value(&a, &OutcomeDistribution::certain(a), &p).unwrap(),
                fs_utility(&a, &p).unwrap()
            ));
        }
    }

    #[test]
    fn malformed_distributions() {
        let a = Allocation::new(1.0, 1.0, 1.0);
        assert!(OutcomeDistribution::new(vec![]).is_err());
        assert!(OutcomeDistribution::new(vec![(Rational64::new(1, 3), a)]).is_err());
        assert!(OutcomeDistribution::new(vec![
            (Rational64::new(3, 2), a),
            (Rational64::new(-1, 2), a)
        ])
        .is_err());
    }

    #[test]
    fn safe_examples() {
        let p = fs(0.8, 0.4, 0.5);
        assert_eq!(partworth_safe(50.0, &p).unwrap(), 50.0);
        assert!(close(partworth_safe(10.0, &p).unwrap(), 2.0));
        assert!(close(partworth_safe(0.0, &p).unwrap(), -10.0));
    }

    #[test]
    fn invest_zero_examples() {
        for d in [0.0, 0.5, 1.0] {
            assert!(close(
                partworth_invest_zero(10.0, 20.0, &fs(0.8, 0.4, d)).unwrap(),
                2.0
            ));
        }
        assert!(close(
            partworth_invest_zero(10.0, 50.0, &fs(0.8, 0.4, 0.5)).unwrap(),
            -4.0
        ));
        assert_eq!(
            partworth_invest_zero(10.0, 0.0, &fs(0.8, 0.4, 0.5)),
            Err(SaitoError::ZeroAmount("z"))
        );
        let p = fs(0.8, 0.4, 0.3);
        let below = partworth_invest_zero(40.0, 10.0 - 1e-9, &p).unwrap();
        let above = partworth_invest_zero(40.0, 10.0 + 1e-9, &p).unwrap();
        assert!((below - above).abs() < 1e-8);
    }

    #[test]
    fn invest_neg_examples() {
        for d in [0.0, 0.5, 1.0] {
            let (v, branch) = partworth_invest_neg_branch(10.0, 20.0, &fs(0.8, 0.4, d)).unwrap();
            assert!(close(v, -5.0));
            assert_eq!(branch, 1);
        }
        let (v, branch) = partworth_invest_neg_branch(40.0, 48.0, &fs(0.8, 0.4, 0.5)).unwrap();
        assert!(close(v, 4.4), "{v}");
        assert_eq!(branch, 4);
        let p = fs(0.8, 0.4, 0.25);
        let edge = 2.0 * (50.0 - 30.0);
        let (lo, b_lo) = partworth_invest_neg_branch(30.0, edge - 1e-9, &p).unwrap();
        let (hi, b_hi) = partworth_invest_neg_branch(30.0, edge, &p).unwrap();
        assert_eq!((b_lo, b_hi), (2, 3));
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn punish_printed_examples() {
        let p = fs(0.8, 0.4, 0.5);
        let (v, b) = partworth_punish_printed_branch(10.0, 10.0, &p).unwrap();
        assert_eq!(b, 1);
        assert!(close(v, 12.0));
        let treatment = Treatment::new(TreatmentId::P);
        assert!(close(
            partworth_oracle(OptionKind::TP, &treatment, 10.0, 10.0, 0.0, &p).unwrap(),
            12.0
        ));
        let (v, b) = partworth_punish_printed_branch(10.0, 25.0, &p).unwrap();
        assert_eq!(b, 2);
        assert!(close(v, 40.0));
        assert!(close(
            partworth_oracle(OptionKind::TP, &treatment, 10.0, 25.0, 0.0, &p).unwrap(),
            15.0
        ));
        assert!(close(
            partworth_punish_direct(10.0, 25.0, &p).unwrap(),
            15.0
        ));
        assert!((partworth_punish_printed(50.0, 1e-12, &p).unwrap() - 50.0).abs() < 1e-9);
        assert!(partworth_punish_printed(10.0, 0.0, &p).is_err());
    }

    #[test]
    fn oracle_examples() {
        let p = fs(0.8, 0.4, 0.5);
        let pi0 = Treatment::new(TreatmentId::PI0);
        assert!(close(
            partworth_oracle(OptionKind::I, &pi0, 10.0, 0.0, 50.0, &p).unwrap(),
            -4.0
        ));
        for t in [0.0, 20.0, 50.0] {
            assert!(close(
                partworth_oracle(OptionKind::S, &pi0, t, 0.0, 0.0, &p).unwrap(),
                partworth_safe(t, &p).unwrap()
            ));
        }
    }

    #[test]
    fn oracle_rejects_bad_actions() {
        let p = fs(0.8, 0.4, 0.5);
        let punish_only = Treatment::new(TreatmentId::P);
        assert!(matches!(
            partworth_oracle(OptionKind::I, &punish_only, 10.0, 0.0, 5.0, &p),
            Err(SaitoError::Unavailable { .. })
        ));
        assert!(matches!(
            partworth_oracle(OptionKind::TP, &punish_only, 10.0, 0.0, 0.0, &p),
            Err(SaitoError::Inconsistent { .. })
        ));
        assert!(matches!(
            partworth_oracle(OptionKind::S, &punish_only, 10.0, 60.0, 0.0, &p),
            Err(SaitoError::OutOfRange { .. })
        ));
    }

    #[test]
    fn ranking_example_point() {
        let p = fs(0.8, 0.4, 0.5);
        let grid = RankingGrid {
            t: vec![10.0],
            p: vec![10.0],
            z: vec![50.0],
        };
        let r = ranking_report(&p, &grid, LotteryKind::ZeroReturn).unwrap();
        assert!(r.passed());
        let row = r.rows[0];
        assert!(close(row.w_tp_oracle, 12.0));
        assert!(close(row.w_s, 2.0));
        assert!(close(row.w_i, -4.0));
        assert!(row.w_tp_oracle > row.w_s && row.w_s > row.w_i);

        let grid = RankingGrid {
            t: vec![10.0],
            p: vec![10.0],
            z: vec![20.0],
        };
        let r = ranking_report(&p, &grid, LotteryKind::NegativeReturn).unwrap();
        assert!(close(r.rows[0].w_s - r.rows[0].w_i, 7.0));
    }

    #[test]
    fn csv_header() {
        let p = fs(0.8, 0.4, 0.5);
        let r = ranking_report(&p, &RankingGrid::default(), LotteryKind::ZeroReturn).unwrap();
        let csv = r.to_csv(4);
        assert!(csv.starts_with("t,p,z,alpha,beta,delta,w_tp_printed,w_tp_oracle,w_s,w_i,branch\n"));
        assert_eq!(csv.lines().count(), 1 + 6 * 10 * 10);
        assert!(r.tp_below_safe > 0);
    }

    #[test]
    fn residuals_match_closed_form() {
        let p = fs(0.8, 0.4, 0.5);
        let res = punish_residuals(&p, &[0.0, 10.0, 40.0], &[5.0, 15.0, 25.0, 45.0]).unwrap();
        assert!(!res.is_empty());
        for r in &res {
            assert!((r.residual - r.predicted).abs() < 1e-9, "{r:?}");
        }
        let at = res.iter().find(|r| r.t == 10.0 && r.p == 25.0).unwrap();
        assert!(close(at.residual, 25.0));
    }
}
