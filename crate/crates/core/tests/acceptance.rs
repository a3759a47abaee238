//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::Instant;

use tpp_core::game::*;
use tpp_core::nccm::*;
use tpp_core::risk::*;
use tpp_core::saito::*;
use tpp_core::simulate::*;
use tpp_core::stats::*;

type Check = Result<String, String>;
type CheckFn = fn() -> Check;
type Partworth = fn(f64, f64, &FsParams) -> Result<f64, SaitoError>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn t0() -> TransferLevel {
    TransferLevel::new(0).unwrap()
}

fn table_b1_values() -> Check {
    let want = [
        (0.5, 119.77),
        (0.4, 154.36),
        (0.3, 202.61),
        (0.2, 271.17),
        (0.1, 370.62),
    ];
    let cs: Vec<f64> = want.iter().map(|w| w.0).collect();
    let rows = table_b1(&PartworthTable::canonical(), 0.05, &cs).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (row, (_, lhs)) in rows.iter().zip(want) {
        worst = worst
            .max((row.lhs - lhs).abs())
            .max((row.rhs - 85.04).abs());
    }
    ensure(worst <= 0.02, format!("max deviation {worst:.4}"))
}

fn crossing_point() -> Check {
    match assumption3_crossing(&PartworthTable::canonical(), 0.05, 1e-9) {
        Ok(Crossing::At(c)) => ensure((c - 0.6469).abs() <= 0.0005, format!("c* = {c:.5}")),
        other => Err(format!("{other:?}")),
    }
}

fn punishment_sweep() -> Check {
    let start = Instant::now();
    let sweep = proposition_sweep(1000, 2024);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        sweep.draws == 1000
            && sweep.comparisons == 5000
            && sweep.prop1_failures == 0
            && secs < 10.0,
        format!(
            "{} draws, {} comparisons, {} violations, {secs:.2} s",
            sweep.draws, sweep.comparisons, sweep.prop1_failures
        ),
    )
}

fn investment_sweep() -> Check {
    let sweep = proposition_sweep(1000, 2024);
    let schedule = PartworthSchedule::constant(PartworthTable::canonical());
    let params = NccmParams::shared(0.7, 0.05).map_err(|e| e.to_string())?;
    let row = verify_proposition2(&schedule, &params, &[t0()])
        .map_err(|e| e.to_string())?
        .rows[0];
    let reversed = !row.asserted && row.pr_i_full < row.pr_i_invest_only;
    ensure(
        sweep.prop2_asserted > 0 && sweep.prop2_failures == 0 && reversed,
        format!(
            "{} asserted, {} violations; c=0.7: Pr(I|PI0)={:.4} < Pr(I|I0)={:.4}",
            sweep.prop2_asserted, sweep.prop2_failures, row.pr_i_full, row.pr_i_invest_only
        ),
    )
}

fn lottery_column() -> Check {
    let gaps: Vec<i64> = lottery_table().iter().map(|p| p.ev_gap()).collect();
    let switch = classify_risk(&expected_value_choices()).switch_point;
    ensure(
        gaps == [
            2680, 1910, 1140, 370, -400, -1170, -1940, -2710, -3480, -4250,
        ] && switch == Some(5),
        format!("gaps {gaps:?}, neutral switch {switch:?}"),
    )
}

fn crra_bounds() -> Check {
    let iv = crra_interval(5).map_err(|e| e.to_string())?;
    let mut chained = true;
    for k in 2..=10 {
        chained &= crra_interval(k - 1).unwrap().hi == crra_interval(k).unwrap().lo;
    }
    ensure(
        (iv.lo + 0.15).abs() <= 0.01 && (iv.hi - 0.15).abs() <= 0.01 && chained,
        format!("({:.4}, {:.4}), shared bounds {chained}", iv.lo, iv.hi),
    )
}

fn control_questions() -> Check {
    use LotteryOutcome::*;
    let tr = Treatment::new(TreatmentId::PI0);
    let t = TransferLevel::new(10).unwrap();
    let cases = [
        (0, 0, NotApplicable, (90, 10, 50)),
        (0, 14, Win, (90, 10, 64)),
        (0, 14, Lose, (90, 10, 36)),
        (18, 0, NotApplicable, (36, 10, 32)),
        (18, 14, Win, (36, 10, 46)),
        (18, 14, Lose, (36, 10, 18)),
    ];
    let mut wrong = Vec::new();
    for (p, z, o, (a, b, c)) in cases {
        let got =
            realized_payoffs(&tr, t, &ThirdPartyAction::new(p, z), o).map_err(|e| e.to_string())?;
        if got != PayoffVector::from_integers(a, b, c) {
            wrong.push(format!("({p},{z},{o:?})"));
        }
    }
    ensure(
        wrong.is_empty(),
        format!("{} cases, wrong: {wrong:?}", cases.len()),
    )
}

fn fs_grid() -> Vec<FsParams> {
    let mut out = Vec::new();
    for alpha in [0.6, 0.8, 1.0, 1.5, 2.0] {
        for beta in [0.45, 0.5, 0.55] {
            for delta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                out.push(FsParams::new(alpha, beta, delta).unwrap());
            }
        }
    }
    out
}

fn oracle_equivalence_grid() -> Check {
    let ts: Vec<f64> = (0..=10).map(|k| 5.0 * k as f64).collect();
    let xs = [
        0.5, 1.0, 3.0, 7.5, 10.0, 12.5, 17.0, 20.0, 25.0, 31.0, 37.5, 44.0, 50.0,
    ];
    let (mut points, mut worst, mut failed) = (0, 0.0f64, Vec::new());
    let mut jumps = 0;
    let (mut residuals, mut residual_err) = (0, 0.0f64);
    for p in fs_grid() {
        for check in oracle_equivalence(&p, &ts, &xs, 1e-9).map_err(|e| e.to_string())? {
            if check.formula == "invest_zero" {
                points += check.points;
            }
            worst = worst.max(check.max_abs_error);
            if !check.passed() {
                failed.push(check.formula);
            }
        }
        let eps = 1e-9;
        for &t in &ts[..10] {
            let gap = 50.0 - t;
            let mut edges: Vec<(f64, Partworth)> = vec![(gap, partworth_invest_zero)];
            for e in [gap, 2.0 * gap, 4.0 * gap] {
                edges.push((e, partworth_invest_neg));
            }
            for e in [gap / 2.0, gap] {
                edges.push((e, partworth_punish_direct));
            }
            for (e, f) in edges.iter().filter(|(e, _)| e + eps <= 50.0) {
                if (f(t, e - eps, &p).unwrap() - f(t, e + eps, &p).unwrap()).abs() > 1e-6 {
                    jumps += 1;
                }
            }
        }
        for r in punish_residuals(&p, &ts, &xs).map_err(|e| e.to_string())? {
            residuals += 1;
            residual_err = residual_err.max((r.residual - r.predicted).abs());
        }
    }
    ensure(
        points >= 10_000 && failed.is_empty() && jumps == 0 && residuals > 0 && residual_err <= 1e-9,
        format!(
            "{points} points per formula, max error {worst:.1e}, failing {failed:?}; {jumps} jumps; \
             {residuals} residuals, max off {residual_err:.1e}"
        ),
    )
}

fn decoy_ordering() -> Check {
    let grid = RankingGrid::default();
    let mut failures = 0;
    let mut head_violations = 0;
    for p in fs_grid() {
        for kind in [LotteryKind::ZeroReturn, LotteryKind::NegativeReturn] {
            failures += ranking_report(&p, &grid, kind)
                .map_err(|e| e.to_string())?
                .failures
                .len();
        }
        if p.delta < 1.0 {
            for &t in &grid.t {
                for &z in &grid.z {
                    let diff =
                        partworth_safe(t, &p).unwrap() - partworth_invest_neg(t, z, &p).unwrap();
                    if diff < z / 4.0 * (1.0 + p.alpha - p.beta) - 1e-9 || diff <= 0.0 {
                        head_violations += 1;
                    }
                }
            }
        }
    }
    ensure(
        failures == 0 && head_violations == 0,
        format!("{failures} ordering failures, {head_violations} lower-bound violations"),
    )
}

fn statistics_oracles() -> Check {
    let w = wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0], RankSumMethod::Exact)
        .unwrap()
        .p_two_sided;
    let f1 = fisher_exact_2x2(3, 0, 0, 3).unwrap().p_two_sided;
    let f2 = fisher_exact_2x2(2, 1, 1, 2).unwrap().p_two_sided;
    let fixed =
        (w - 1.0 / 3.0).abs() < 1e-12 && (f1 - 0.1).abs() < 1e-12 && (f2 - 1.0).abs() < 1e-12;

    // every tie-free split of ranks 1..=N into sizes n and m, n + m = N <= 12
    let (mut worst, mut at) = (0.0f64, (0, 0));
    for total in 2..=12usize {
        for mask in 0u32..(1 << total) {
            let n = mask.count_ones() as usize;
            if n == 0 || n == total {
                continue;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = {
                let (mut x, mut y) = (Vec::new(), Vec::new());
                for i in 0..total {
                    if mask >> i & 1 == 1 {
                        x.push(i as f64)
                    } else {
                        y.push(i as f64)
                    }
                }
                (x, y)
            };
            let e = wilcoxon_rank_sum(&x, &y, RankSumMethod::Exact)
                .unwrap()
                .p_two_sided;
            let a = wilcoxon_rank_sum(&x, &y, RankSumMethod::NormalApprox)
                .unwrap()
                .p_two_sided;
            if (a - e).abs() > worst {
                worst = (a - e).abs();
                at = (n, total - n);
            }
        }
    }
    ensure(
        fixed && worst <= 0.02,
        format!(
            "fixed values {}; exhaustive normal-vs-exact max gap {worst:.4} at (n, m) = {at:?}",
            if fixed { "ok" } else { "wrong" }
        ),
    )
}

fn end_to_end() -> Check {
    let spec = PopulationSpec {
        c_material: ParamDist::uniform(0.2, 0.5),
        shared_concavity: true,
        ..PopulationSpec::point_mass(60, 11)
    };
    let run = |workers| {
        let agents = sample_population(&spec).unwrap();
        simulate_dataset(
            &agents,
            &TreatmentId::ALL,
            AllocationRule::MultinomialTokens,
            workers,
        )
        .unwrap()
    };
    let a = run(1);
    let same = a.to_csv_string().unwrap() == run(1).to_csv_string().unwrap()
        && a.to_csv_string().unwrap() == run(6).to_csv_string().unwrap();
    let report = analyze(&a, RankSumMethod::Auto).map_err(|e| e.to_string())?;
    let avg = |t, m| report.average(t, m).unwrap();
    let (pp, pi) = (
        avg(TreatmentId::P, Measure::MeanPunishment),
        avg(TreatmentId::PI0, Measure::MeanPunishment),
    );
    let (ii, i0) = (
        avg(TreatmentId::PI0, Measure::MeanInvestment),
        avg(TreatmentId::I0, Measure::MeanInvestment),
    );
    ensure(
        same && pi < pp && ii >= i0,
        format!(
            "byte-identical {same}; punishment PI0 {pi:.2} vs P {pp:.2}; investment PI0 {ii:.2} vs I0 {i0:.2}"
        ),
    )
}

fn main() {
    let criteria: [(&str, CheckFn); 11] = [
        ("investment-share condition grid", table_b1_values),
        ("crossing point", crossing_point),
        ("punishment share sweep", punishment_sweep),
        ("investment share sweep", investment_sweep),
        ("lottery EV column", lottery_column),
        ("CRRA interval", crra_bounds),
        ("control question payoffs", control_questions),
        ("inequity-aversion oracle", oracle_equivalence_grid),
        ("decoy ordering", decoy_ordering),
        ("statistics oracles", statistics_oracles),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
