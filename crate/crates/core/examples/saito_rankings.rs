//! Inequity-aversion partworths: closed forms against the brute-force
//! oracle, the safe-versus-investment ordering, and the residuals of the
//! published punishment formula.

use tpp_core::saito::{
    oracle_equivalence, partworth_safe, punish_residuals, ranking_report, FsParams, LotteryKind,
    RankingGrid,
};

pub fn main() {
    let params = FsParams::new(0.9, 0.3, 0.4).unwrap();
    println!("W_S at t=10: {:.4}", partworth_safe(10.0, &params).unwrap());

    let t: Vec<f64> = (0..=5).map(|k| 10.0 * k as f64).collect();
    let x: Vec<f64> = (1..=50).map(f64::from).collect();
    for check in oracle_equivalence(&params, &t, &x, 1e-9).unwrap() {
        println!(
            "{:<24} max |err| {:.1e}",
            check.formula, check.max_abs_error
        );
    }

    for lottery in [LotteryKind::ZeroReturn, LotteryKind::NegativeReturn] {
        let report = ranking_report(&params, &RankingGrid::default(), lottery).unwrap();
        println!(
            "{} return: {} rows, ordering {}",
            lottery.as_str(),
            report.rows.len(),
            if report.passed() {
                "confirmed"
            } else {
                "violated"
            }
        );
        let csv = report.to_csv(4);
        println!("  {}", csv.lines().nth(1).unwrap());
    }

    let res = punish_residuals(&params, &[20.0], &[16.0, 20.0, 30.0, 40.0]).unwrap();
    for r in &res {
        println!(
            "t={} p={} branch {}: printed - oracle = {:.4} (predicted {:.4})",
            r.t, r.p, r.branch, r.residual, r.predicted
        );
    }
}
