//! Where the investment-share condition turns, and how that moves with the
//! logit scale.

use tpp_core::game::{TransferLevel, TreatmentId};
use tpp_core::nccm::{
    assumption3_crossing, context_probabilities, Context, Crossing, NccmParams, OptionKind,
    PartworthTable,
};

pub fn main() {
    let w = PartworthTable::canonical();
    for b in [0.01, 0.05, 0.1, 0.2] {
        match assumption3_crossing(&w, b, 1e-6).unwrap() {
            Crossing::At(c) => println!("b={b:<5} c* = {c:.4}"),
            Crossing::NoCrossing => println!("b={b:<5} no crossing"),
        }
    }
    println!();

    let t = TransferLevel::new(0).unwrap();
    for c in [0.3, 0.6469, 0.7] {
        let params = NccmParams::shared(c, 0.05).unwrap();
        let pr = |id| {
            let (_, pr) =
                context_probabilities(&Context::new(id, t).unwrap(), &w, &params).unwrap();
            pr.get(OptionKind::I).unwrap()
        };
        println!(
            "c={c:<6} Pr(I|PI0)={:.4} Pr(I|I0)={:.4}",
            pr(TreatmentId::PI0),
            pr(TreatmentId::I0)
        );
    }
}
