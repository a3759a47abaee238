//! Bracketing root finder shared by the CRRA interval and crossing-point
//! computations.

/// Result of searching a bracket for a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    Root(f64),
    /// `f` has the same strict sign at both ends.
    NoSignChange,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// Returns the midpoint of the final bracket. An exact zero at an endpoint
/// is returned as is.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Bracket
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo < hi && tol > 0.0);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Bracket::Root(lo);
    }
    if f_hi == 0.0 {
        return Bracket::Root(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Bracket::NoSignChange;
    }
    // 200 halvings exhaust f64 resolution on any finite bracket
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Bracket::Root(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Bracket::Root(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        match bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12) {
            Bracket::Root(r) => assert!((r - 2f64.sqrt()).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_missing_sign_change() {
        assert_eq!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Bracket::NoSignChange
        );
    }

    #[test]
    fn decreasing_function() {
        match bisect(|x| 1.0 - x, -3.0, 5.0, 1e-10) {
            Bracket::Root(r) => assert!((r - 1.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
    }
}
