//! Randomized sweep of both proposition checks, then the canonical model
//! on each side of the crossing.

use tpp_core::game::TransferLevel;
use tpp_core::nccm::{
    proposition_sweep, verify_proposition1, verify_proposition2, NccmParams, PartworthSchedule,
    PartworthTable,
};

pub fn main() {
    let sweep = proposition_sweep(1000, 2024);
    println!("{sweep:#?}");
    assert!(sweep.passed());

    let schedule = PartworthSchedule::constant(PartworthTable::canonical());
    for c in [0.5, 0.7] {
        let params = NccmParams::shared(c, 0.05).unwrap();
        let p1 = verify_proposition1(&schedule, &params, &TransferLevel::UNEQUAL).unwrap();
        let p2 = verify_proposition2(&schedule, &params, &TransferLevel::UNEQUAL).unwrap();
        let r1 = &p1.rows[0];
        let r2 = &p2.rows[0];
        println!(
            "c={c}: Pr(TP) {:.4} -> {:.4}; condition {}; Pr(I) {:.4} -> {:.4}",
            r1.pr_tp_punish_only,
            r1.pr_tp_full,
            if r2.asserted { "holds" } else { "fails" },
            r2.pr_i_invest_only,
            r2.pr_i_full
        );
    }
}
