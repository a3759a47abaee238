//! Risk elicitation: the ten lottery pairs, switch-point classification
//! and the CRRA interval implied by each switch point.

use tpp_core::risk::{
    classify_risk, crra_choices, crra_interval, expected_value_choices, lottery_table, ChoiceVector,
};

pub fn main() {
    for pair in lottery_table() {
        println!(
            "q{:<2} p={:.1}  L=({}, {})  R=({}, {})  E(L)-E(R)={}",
            pair.question,
            pair.high_probability(),
            pair.left.0,
            pair.left.1,
            pair.right.0,
            pair.right.1,
            pair.ev_gap()
        );
    }
    println!();

    let ev = expected_value_choices();
    println!("expected-value chooser {ev} -> {:?}", classify_risk(&ev));

    for s in ["LLLLLLLRRR", "LLRRRRRRRR", "LLLRLRRRRR", "LLLLLLLLLL"] {
        let v: ChoiceVector = s.parse().unwrap();
        let class = classify_risk(&v);
        match class.switch_point {
            Some(k) => println!(
                "{v}: {} r in {}",
                class.attitude,
                crra_interval(k as i64).unwrap()
            ),
            None => println!("{v}: {}", class.attitude),
        }
    }
    println!();

    for k in 1..=10 {
        println!("switch {k:>2}: {}", crra_interval(k).unwrap());
    }

    // a CRRA agent lands inside its own interval
    let r = 0.5;
    let class = classify_risk(&crra_choices(r));
    println!("CRRA r={r} switches at {:?}", class.switch_point);
}
