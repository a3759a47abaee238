use proptest::prelude::*;
use tpp_core::risk::*;

/// Plain CRRA expected-utility gap in KRW, written from scratch.
fn eu_gap(q: u8, r: f64) -> f64 {
    let p = q as f64 / 10.0;
    let u = |w: f64| {
        if (r - 1.0).abs() < 1e-12 {
            w.ln()
        } else {
            w.powf(1.0 - r) / (1.0 - r)
        }
    };
    p * u(3750.0) + (1.0 - p) * u(3550.0) - p * u(8000.0) - (1.0 - p) * u(100.0)
}

#[test]
fn sixth_root_matches_grid_scan() {
    let mut r = -1.0;
    let mut found = None;
    while r < 2.0 {
        if eu_gap(6, r) < 0.0 && eu_gap(6, r + 1e-4) >= 0.0 {
            found = Some(r + 0.5e-4);
            break;
        }
        r += 1e-4;
    }
    let scan = found.expect("sign change");
    let root = indifference_root(6).unwrap();
    assert!((root - scan).abs() <= 1e-4, "{root} vs {scan}");
    assert_eq!(crra_interval(6).unwrap().hi, root);
    assert_eq!(crra_interval(7).unwrap().lo, root);
}

#[test]
fn intervals_chain_and_increase() {
    for k in 2..=10 {
        let prev = crra_interval(k - 1).unwrap();
        let cur = crra_interval(k).unwrap();
        assert_eq!(prev.hi, cur.lo);
        assert!(cur.lo < cur.hi);
        assert!(prev.lo < cur.lo);
    }
    assert_eq!(crra_interval(1).unwrap().lo, f64::NEG_INFINITY);
    assert_eq!(crra_interval(10).unwrap().hi, f64::INFINITY);
    assert!(crra_interval(0).is_err() && crra_interval(11).is_err());
}

#[test]
fn every_root_agrees_with_the_independent_gap() {
    for q in 1..=9u8 {
        let r = indifference_root(q).unwrap();
        assert!(eu_gap(q, r - 1e-4) * eu_gap(q, r + 1e-4) < 0.0, "q{q}");
    }
    assert!(indifference_root(10).is_none());
}

#[test]
fn ev_column_and_neutral_switch() {
    let gaps: Vec<i64> = lottery_table().iter().map(|p| p.ev_gap()).collect();
    assert_eq!(
        gaps,
        [2680, 1910, 1140, 370, -400, -1170, -1940, -2710, -3480, -4250]
    );
    assert_eq!(expected_value_choices().to_string(), "LLLLRRRRRR");
    assert_eq!(
        classify_risk(&expected_value_choices()).switch_point,
        Some(5)
    );
    assert_eq!(classify_risk(&crra_choices(0.0)).switch_point, Some(5));
}

proptest! {
    #[test]
    fn crra_agents_land_in_their_interval(r in -1.8f64..1.2) {
        let class = classify_risk(&crra_choices(r));
        let k = class.switch_point.expect("consistent") as i64;
        let iv = crra_interval(k).unwrap();
        prop_assert!(iv.lo - 1e-5 <= r && r <= iv.hi + 1e-5);
    }

    #[test]
    fn single_switch_vectors_classify_by_position(k in 1usize..=10) {
        let s: String = (1..=10).map(|q| if q < k { 'L' } else { 'R' }).collect();
        let class = classify_risk(&s.parse().unwrap());
        prop_assert_eq!(class.switch_point, Some(k as u8));
        let want = match k.cmp(&5) {
            std::cmp::Ordering::Less => RiskAttitude::Loving,
            std::cmp::Ordering::Equal => RiskAttitude::Neutral,
            std::cmp::Ordering::Greater => RiskAttitude::Averse,
        };
        prop_assert_eq!(class.attitude, want);
    }

    #[test]
    fn returning_to_l_is_inconsistent(bits in prop::collection::vec(any::<bool>(), 10)) {
        let s: String = bits.iter().map(|b| if *b { 'R' } else { 'L' }).collect();
        let first_r = bits.iter().position(|b| *b);
        let monotone = first_r.map(|i| bits[i..].iter().all(|b| *b)).unwrap_or(false);
        let class = classify_risk(&s.parse().unwrap());
        prop_assert_eq!(class.attitude == RiskAttitude::Inconsistent, !monotone);
    }
}
