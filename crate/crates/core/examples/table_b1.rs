//! Both sides of the investment-share condition for the canonical
//! partworths over a grid of shared concavities.

use tpp_core::nccm::{format_table_b1, table_b1, PartworthTable};

pub fn main() {
    let w = PartworthTable::canonical();
    let rows = table_b1(&w, 0.05, &[0.5, 0.4, 0.3, 0.2, 0.1]).unwrap();
    print!("{}", format_table_b1(&rows, 2));
    println!();

    // past the crossing the condition fails
    for r in table_b1(&w, 0.05, &[0.6, 0.65, 0.7, 0.8, 0.9]).unwrap() {
        println!(
            "c={:<4} LHS={:>8.2} RHS={:>8.2} holds={}",
            r.c, r.lhs, r.rhs, r.holds
        );
    }
}
