//! The convex monotone map `psi(r) = r^2 / (A r + B)` and its closed-form
//! inverse, used to convert telescoped distance decrements into rates.

/// Requires `A, B >= 0`, not both zero. `psi(0) = 0` by continuity.
pub fn psi(r: f64, a: f64, b: f64) -> f64 {
    assert!(a >= 0.0 && b >= 0.0 && a + b > 0.0, "need A, B >= 0, A + B > 0");
    assert!(r >= 0.0, "psi is defined for r >= 0");
    if r == 0.0 {
        return 0.0;
    }
    r * r / (a * r + b)
}

/// Inverse of `psi`: `psi_inv(s) = (s A + sqrt(s^2 A^2 + 4 s B)) / 2`.
pub fn psi_inv(s: f64, a: f64, b: f64) -> f64 {
    assert!(a >= 0.0 && b >= 0.0 && a + b > 0.0, "need A, B >= 0, A + B > 0");
    assert!(s >= 0.0, "psi_inv is defined for s >= 0");
    0.5 * (s * a + (s * s * a * a + 4.0 * s * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn linear_case_is_identity() {
        for r in [0.0, 0.5, 2.0, 10.0] {
            assert_relative_eq!(psi(r, 1.0, 0.0), r);
            assert_relative_eq!(psi_inv(r, 1.0, 0.0), r);
        }
    }

    #[test]
    fn pure_quadratic_case_is_square_and_sqrt() {
        for r in [0.0, 0.5, 2.0, 10.0] {
            assert_relative_eq!(psi(r, 0.0, 1.0), r * r);
        }
        for s in [0.0, 0.25, 4.0] {
            assert_relative_eq!(psi_inv(s, 0.0, 1.0), s.sqrt());
        }
    }

    #[test]
    #[should_panic(expected = "A + B > 0")]
    fn both_zero_is_a_contract_violation() {
        psi(1.0, 0.0, 0.0);
    }

    #[test]
    fn monotone_and_midpoint_convex() {
        let mut rng = make_rng(0);
        for _ in 0..10_000 {
            let a = rng.uniform_range(0.0, 10.0);
            let b = rng.uniform_range(1e-6, 10.0);
            let r1 = rng.uniform_range(0.0, 10.0);
            let r2 = rng.uniform_range(0.0, 10.0);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            assert!(psi(lo, a, b) <= psi(hi, a, b) + 1e-12);
            let mid = 0.5 * (lo + hi);
            assert!(psi(mid, a, b) <= 0.5 * psi(lo, a, b) + 0.5 * psi(hi, a, b) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_tight(
            a in 0.0f64..10.0,
            b in 0.0f64..10.0,
            s in 0.0f64..10.0,
        ) {
            prop_assume!(a + b > 1e-9);
            let r = psi_inv(s, a, b);
            let back = psi(r, a, b);
            prop_assert!((back - s).abs() <= 1e-10 * (1.0 + s.abs()));
        }
    }
}
