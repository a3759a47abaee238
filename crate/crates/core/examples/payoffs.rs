//! Payoffs in the three-player game: the four control questions, the
//! expected value of each choice, and the final cash conversion.

use num_rational::Rational64;
use tpp_core::game::{
    ex_ante_expected_payoffs, final_cash_krw, fmt_ratio, realized_payoffs, LotteryOutcome,
    ThirdPartyAction, TransferLevel, Treatment, TreatmentId,
};

pub fn main() {
    let t = TransferLevel::new(10).unwrap();
    let full = Treatment::new(TreatmentId::PI0);

    println!("control questions, {} at t = {}", full.id, t);
    for (p, z) in [(0, 0), (0, 14), (18, 0), (18, 14)] {
        let action = ThirdPartyAction::new(p, z);
        if z == 0 {
            let v = realized_payoffs(&full, t, &action, LotteryOutcome::NotApplicable).unwrap();
            println!("  p={p:>2} z={z:>2}        {v}");
        } else {
            for outcome in [LotteryOutcome::Win, LotteryOutcome::Lose] {
                let v = realized_payoffs(&full, t, &action, outcome).unwrap();
                println!("  p={p:>2} z={z:>2} {:<6} {v}", format!("{outcome:?}"));
            }
        }
    }

    // the negative-return lottery pays half a token on odd stakes
    let neg = Treatment::new(TreatmentId::PIneg);
    let action = ThirdPartyAction::new(0, 15);
    println!();
    println!(
        "{} z=15 expected {}",
        neg.id,
        ex_ante_expected_payoffs(&neg, t, &action).unwrap()
    );
    println!(
        "{} z=15 win      {}",
        neg.id,
        realized_payoffs(&neg, t, &action, LotteryOutcome::Win).unwrap()
    );

    // a move that is not on the menu is rejected
    let err = realized_payoffs(
        &Treatment::new(TreatmentId::P),
        t,
        &ThirdPartyAction::new(0, 5),
        LotteryOutcome::Win,
    )
    .unwrap_err();
    println!("P with z=5: {err}");

    let cash = final_cash_krw(3750, Rational64::from_integer(30), false).unwrap();
    println!();
    println!(
        "3750 KRW + 30 tokens = {} KRW (before show-up fee)",
        fmt_ratio(cash)
    );
}
